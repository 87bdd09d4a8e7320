/** Typed client for the slide server's REST API. */
export class ApiError extends Error {
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
async function raiseForStatus(response) {
    if (response.ok)
        return;
    let code = "http_error";
    let message = response.statusText;
    try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
    }
    catch {
        // non-JSON error body; keep the defaults
    }
    throw new ApiError(response.status, code, message);
}
export class ApiClient {
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    async listSlides() {
        const response = await fetch(`${this.baseUrl}/api/slides`);
        await raiseForStatus(response);
        return response.json();
    }
    async channelNames(slideId) {
        const response = await fetch(`${this.baseUrl}/api/slides/${encodeURIComponent(slideId)}/channels`);
        await raiseForStatus(response);
        return response.json();
    }
    async render(slideId, layers) {
        const response = await fetch(`${this.baseUrl}/api/render`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ slide_id: slideId, layers }),
        });
        await raiseForStatus(response);
        return response.blob();
    }
    async search(image, filename = "capture.png") {
        const form = new FormData();
        form.append("image", image, filename);
        const response = await fetch(`${this.baseUrl}/api/search`, {
            method: "POST",
            body: form,
        });
        await raiseForStatus(response);
        return response.json();
    }
    async health() {
        const response = await fetch(`${this.baseUrl}/api/health`);
        await raiseForStatus(response);
        return response.json();
    }
}
