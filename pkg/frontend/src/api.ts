/** Typed client for the slide server's REST API. */

export interface SlideInfo {
	slide_id: string;
	modality: string;
	width: number;
	height: number;
	channel_count: number;
}

export interface SlideHit {
	slide_id: string;
	voting_number: number;
	per_channel_votes: Record<string, number>;
}

export interface SearchResponse {
	hits: SlideHit[];
	query: { bbox_original: number[]; patch_count: number };
}

export interface LayerRequest {
	channel: number;
	color: string; // RRGGBB
	threshold: number;
}

export class ApiError extends Error {
	constructor(
		public status: number,
		public code: string,
		message: string,
	) {
		super(message);
	}
}

async function raiseForStatus(response: Response): Promise<void> {
	if (response.ok) return;
	let code = "http_error";
	let message = response.statusText;
	try {
		const body = await response.json();
		code = body.code ?? code;
		message = body.message ?? message;
	} catch {
		// non-JSON error body; keep the defaults
	}
	throw new ApiError(response.status, code, message);
}

export class ApiClient {
	constructor(private baseUrl = "") {}

	async listSlides(): Promise<SlideInfo[]> {
		const response = await fetch(`${this.baseUrl}/api/slides`);
		await raiseForStatus(response);
		return response.json();
	}

	async channelNames(slideId: string): Promise<string[]> {
		const response = await fetch(
			`${this.baseUrl}/api/slides/${encodeURIComponent(slideId)}/channels`,
		);
		await raiseForStatus(response);
		return response.json();
	}

	async render(slideId: string, layers: LayerRequest[]): Promise<Blob> {
		const response = await fetch(`${this.baseUrl}/api/render`, {
			method: "POST",
			headers: { "Content-Type": "application/json" },
			body: JSON.stringify({ slide_id: slideId, layers }),
		});
		await raiseForStatus(response);
		return response.blob();
	}

	async search(image: Blob, filename = "capture.png"): Promise<SearchResponse> {
		const form = new FormData();
		form.append("image", image, filename);
		const response = await fetch(`${this.baseUrl}/api/search`, {
			method: "POST",
			body: form,
		});
		await raiseForStatus(response);
		return response.json();
	}

	async health(): Promise<{ status: string; slides: number; index_built: boolean }> {
		const response = await fetch(`${this.baseUrl}/api/health`);
		await raiseForStatus(response);
		return response.json();
	}
}
