/** Left panel: photo upload/preview and the Update search trigger. */
import { ApiError } from "./api.js";
import { blobUrl } from "./util.js";
export class CapturePanel {
    constructor(root, api, onResults) {
        this.api = api;
        this.onResults = onResults;
        this.capture = null;
        this.searching = null;
        this.fileInput = root.querySelector("#capture-file");
        this.updateButton = root.querySelector("#capture-update");
        this.preview = root.querySelector("#capture-preview");
        this.notice = root.querySelector("#capture-notice");
        this.updateButton.disabled = true; // nothing to search yet
        this.fileInput.addEventListener("change", () => {
            const file = this.fileInput.files?.[0];
            if (file)
                this.setCapture(file);
        });
        const drop = root.querySelector("#capture-drop");
        drop.addEventListener("dragover", (ev) => ev.preventDefault());
        drop.addEventListener("drop", (ev) => {
            ev.preventDefault();
            const file = ev.dataTransfer?.files?.[0];
            if (file)
                this.setCapture(file);
        });
        this.updateButton.addEventListener("click", () => {
            this.searching = this.runSearch();
        });
    }
    setCapture(image) {
        this.capture = image;
        const url = blobUrl(image);
        if (url)
            this.preview.src = url;
        this.updateButton.disabled = false;
        this.notice.textContent = "";
    }
    async runSearch() {
        if (!this.capture)
            return;
        this.notice.textContent = "searching…";
        try {
            const result = await this.api.search(this.capture);
            this.notice.textContent = `${result.query.patch_count} patches searched`;
            this.onResults(result.hits);
        }
        catch (err) {
            if (err instanceof ApiError && err.code === "no_tissue") {
                this.notice.textContent = "no tissue found in this photo";
                this.onResults([]);
            }
            else {
                this.notice.textContent = `search failed: ${err.message}`;
            }
        }
    }
}
