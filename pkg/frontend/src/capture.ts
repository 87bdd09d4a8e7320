/** Left panel: photo upload/preview and the Update search trigger. */

import { ApiClient, ApiError, SlideHit } from "./api.js";
import { blobUrl } from "./util.js";

export class CapturePanel {
	readonly fileInput: HTMLInputElement;
	readonly updateButton: HTMLButtonElement;
	readonly preview: HTMLImageElement;
	readonly notice: HTMLElement;
	private capture: Blob | null = null;
	searching: Promise<void> | null = null;

	constructor(
		root: HTMLElement,
		private api: ApiClient,
		private onResults: (hits: SlideHit[]) => void,
	) {
		this.fileInput = root.querySelector("#capture-file") as HTMLInputElement;
		this.updateButton = root.querySelector("#capture-update") as HTMLButtonElement;
		this.preview = root.querySelector("#capture-preview") as HTMLImageElement;
		this.notice = root.querySelector("#capture-notice") as HTMLElement;
		this.updateButton.disabled = true; // nothing to search yet

		this.fileInput.addEventListener("change", () => {
			const file = this.fileInput.files?.[0];
			if (file) this.setCapture(file);
		});
		const drop = root.querySelector("#capture-drop") as HTMLElement;
		drop.addEventListener("dragover", (ev) => ev.preventDefault());
		drop.addEventListener("drop", (ev) => {
			ev.preventDefault();
			const file = ev.dataTransfer?.files?.[0];
			if (file) this.setCapture(file);
		});
		this.updateButton.addEventListener("click", () => {
			this.searching = this.runSearch();
		});
	}

	setCapture(image: Blob): void {
		this.capture = image;
		const url = blobUrl(image);
		if (url) this.preview.src = url;
		this.updateButton.disabled = false;
		this.notice.textContent = "";
	}

	private async runSearch(): Promise<void> {
		if (!this.capture) return;
		this.notice.textContent = "searching…";
		try {
			const result = await this.api.search(this.capture);
			this.notice.textContent = `${result.query.patch_count} patches searched`;
			this.onResults(result.hits);
		} catch (err) {
			if (err instanceof ApiError && err.code === "no_tissue") {
				this.notice.textContent = "no tissue found in this photo";
				this.onResults([]);
			} else {
				this.notice.textContent = `search failed: ${(err as Error).message}`;
			}
		}
	}
}
