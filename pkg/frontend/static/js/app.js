/** Wire the three panels together against the REST API. */
import { ApiClient } from "./api.js";
import { CapturePanel } from "./capture.js";
import { ResultsPanel } from "./results.js";
import { ViewerPanel } from "./viewer.js";
export function createApp(doc, baseUrl = "") {
    const api = new ApiClient(baseUrl);
    const viewer = new ViewerPanel(doc.getElementById("panel-viewer"), api);
    const results = new ResultsPanel(doc.getElementById("panel-results"), (slideId) => void viewer.selectSlide(slideId, true));
    const capture = new CapturePanel(doc.getElementById("panel-capture"), api, (hits) => {
        viewer.state.lastHits = hits;
        results.render(hits);
    });
    const ready = viewer.loadSlideList();
    return { api, capture, viewer, results, ready };
}
