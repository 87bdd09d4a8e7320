/** Right panel: the most similar slides, with vote breakdowns and click-to-view. */

import { SlideHit } from "./api.js";
import { el } from "./util.js";

export class ResultsPanel {
	readonly list: HTMLElement;
	private doc: Document;

	constructor(
		root: HTMLElement,
		private onSelect: (slideId: string) => void,
	) {
		this.doc = root.ownerDocument;
		this.list = root.querySelector("#results-list") as HTMLElement;
		this.render([]);
	}

	render(hits: SlideHit[]): void {
		this.list.innerHTML = "";
		if (hits.length === 0) {
			this.list.append(el(this.doc, "p", "placeholder", "no results yet — capture a slide and press Update"));
			return;
		}
		hits.forEach((hit, rank) => {
			const item = el(this.doc, "div", "hit");
			item.dataset.slideId = hit.slide_id;
			const breakdown = Object.entries(hit.per_channel_votes)
				.map(([channel, votes]) => `${channel}: ${votes}`)
				.join(", ");
			item.title = breakdown; // per-channel votes on hover
			item.append(
				el(this.doc, "span", "hit-rank", `#${rank + 1}`),
				el(this.doc, "span", "hit-id", hit.slide_id),
				el(this.doc, "span", "hit-votes", `${hit.voting_number} votes`),
			);
			const detail = el(this.doc, "div", "hit-breakdown", breakdown);
			item.append(detail);
			item.addEventListener("click", () => this.onSelect(hit.slide_id));
			this.list.append(item);
		});
	}
}
