/** Center panel: slide dropdown, channel carousel, layer controls, composite image. */

import { ApiClient } from "./api.js";
import { LatestWinsQueue, MAX_LAYERS, ViewerState } from "./state.js";
import { blobUrl, el } from "./util.js";

export class ViewerPanel {
	readonly select: HTMLSelectElement;
	readonly carousel: HTMLElement;
	readonly layersBox: HTMLElement;
	readonly image: HTMLImageElement;
	readonly notice: HTMLElement;
	readonly state = new ViewerState();
	readonly queue = new LatestWinsQueue();
	private doc: Document;

	constructor(
		root: HTMLElement,
		private api: ApiClient,
	) {
		this.doc = root.ownerDocument;
		this.select = root.querySelector("#viewer-slide") as HTMLSelectElement;
		this.carousel = root.querySelector("#viewer-carousel") as HTMLElement;
		this.layersBox = root.querySelector("#viewer-layers") as HTMLElement;
		this.image = root.querySelector("#viewer-image") as HTMLImageElement;
		this.notice = root.querySelector("#viewer-notice") as HTMLElement;
		this.select.addEventListener("change", () => {
			if (this.select.value) void this.selectSlide(this.select.value);
		});
	}

	async loadSlideList(): Promise<void> {
		const slides = await this.api.listSlides();
		this.select.innerHTML = "";
		this.select.append(el(this.doc, "option", undefined, "select a slide…"));
		(this.select.options[0] as HTMLOptionElement).value = "";
		for (const s of slides) {
			const option = el(this.doc, "option", undefined, `${s.slide_id} (${s.channel_count} ch)`);
			option.value = s.slide_id;
			this.select.append(option);
		}
	}

	async selectSlide(slideId: string, withDefaultLayers = false): Promise<void> {
		const names = await this.api.channelNames(slideId);
		this.state.setSlide(slideId, names);
		if (withDefaultLayers) this.state.applyDefaultLayers();
		this.select.value = slideId;
		this.renderCarousel();
		this.renderLayerControls();
		this.requestRender();
	}

	addLayer(channel: number): void {
		if (!this.state.addLayer(channel)) {
			this.notice.textContent = `layer limit: at most ${MAX_LAYERS} channels at once`;
			return;
		}
		this.notice.textContent = "";
		this.renderLayerControls();
		this.requestRender();
	}

	removeLayer(index: number): void {
		this.state.removeLayer(index);
		this.renderLayerControls();
		this.requestRender();
	}

	private renderCarousel(): void {
		this.carousel.innerHTML = "";
		this.state.channelNames.forEach((name, i) => {
			const chip = el(this.doc, "button", "chip", name);
			chip.title = `add ${name} as a layer`;
			chip.addEventListener("click", () => this.addLayer(i));
			this.carousel.append(chip);
		});
	}

	private renderLayerControls(): void {
		this.layersBox.innerHTML = "";
		this.state.layers.forEach((layer, i) => {
			const row = el(this.doc, "div", "layer-row");
			const label = el(this.doc, "span", "layer-name", this.state.channelNames[layer.channel]);

			const color = el(this.doc, "input") as HTMLInputElement;
			color.type = "color";
			color.value = `#${layer.color}`;
			color.addEventListener("input", () => {
				if (this.state.setColor(i, color.value.replace("#", ""))) this.requestRender();
			});

			const threshold = el(this.doc, "input") as HTMLInputElement;
			threshold.type = "range";
			threshold.min = "0";
			threshold.max = "255";
			threshold.value = String(layer.threshold);
			threshold.addEventListener("input", () => {
				if (this.state.setThreshold(i, Number(threshold.value))) this.requestRender();
			});

			const remove = el(this.doc, "button", "remove", "×");
			remove.addEventListener("click", () => this.removeLayer(i));

			row.append(label, color, threshold, remove);
			this.layersBox.append(row);
		});
	}

	/** One coalesced render round trip; clears the canvas when no layers remain. */
	requestRender(): void {
		const layers = this.state.renderRequest();
		if (!layers) {
			this.image.removeAttribute("src");
			return;
		}
		const slideId = this.state.slideId as string;
		this.queue.submit(
			() => this.api.render(slideId, layers),
			(blob) => {
				const url = blobUrl(blob);
				if (url) this.image.src = url;
				this.image.dataset.renderedLayers = String(layers.length);
			},
			(err) => {
				this.notice.textContent = `render failed: ${(err as Error).message}`;
			},
		);
	}
}
