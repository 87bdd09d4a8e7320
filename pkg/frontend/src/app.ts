/** Wire the three panels together against the REST API. */

import { ApiClient } from "./api.js";
import { CapturePanel } from "./capture.js";
import { ResultsPanel } from "./results.js";
import { ViewerPanel } from "./viewer.js";

export interface App {
	api: ApiClient;
	capture: CapturePanel;
	viewer: ViewerPanel;
	results: ResultsPanel;
	ready: Promise<void>;
}

export function createApp(doc: Document, baseUrl = ""): App {
	const api = new ApiClient(baseUrl);
	const viewer = new ViewerPanel(doc.getElementById("panel-viewer") as HTMLElement, api);
	const results = new ResultsPanel(
		doc.getElementById("panel-results") as HTMLElement,
		(slideId) => void viewer.selectSlide(slideId, true),
	);
	const capture = new CapturePanel(
		doc.getElementById("panel-capture") as HTMLElement,
		api,
		(hits) => {
			viewer.state.lastHits = hits;
			results.render(hits);
		},
	);
	const ready = viewer.loadSlideList();
	return { api, capture, viewer, results, ready };
}
