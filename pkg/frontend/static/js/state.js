/** Viewer state and request scheduling, kept free of DOM so it unit-tests cleanly. */
export const MAX_LAYERS = 7;
// distinct presets for the first seven channels of a one-click hit load
export const PRESET_COLORS = [
    "FFFFFF",
    "FF0000",
    "00FF00",
    "0000FF",
    "FFFF00",
    "FF00FF",
    "00FFFF",
];
export function isValidColor(color) {
    return /^[0-9a-fA-F]{6}$/.test(color);
}
export function isValidThreshold(threshold) {
    return Number.isInteger(threshold) && threshold >= 0 && threshold <= 255;
}
export class ViewerState {
    constructor() {
        this.slideId = null;
        this.channelNames = [];
        this.layers = [];
        this.lastHits = [];
    }
    get canAddLayer() {
        return this.layers.length < MAX_LAYERS;
    }
    /** Add a layer for a channel; false when the 7-layer cap blocks it. */
    addLayer(channel) {
        if (!this.canAddLayer)
            return false;
        if (channel < 0 || channel >= this.channelNames.length)
            return false;
        this.layers.push({
            channel,
            color: PRESET_COLORS[this.layers.length % PRESET_COLORS.length],
            threshold: 0,
        });
        return true;
    }
    removeLayer(index) {
        this.layers.splice(index, 1);
    }
    setColor(index, color) {
        if (!isValidColor(color))
            return false;
        this.layers[index].color = color.toUpperCase();
        return true;
    }
    setThreshold(index, threshold) {
        if (!isValidThreshold(threshold))
            return false;
        this.layers[index].threshold = threshold;
        return true;
    }
    setSlide(slideId, channelNames) {
        this.slideId = slideId;
        this.channelNames = channelNames;
        this.layers = [];
    }
    /** First <=7 channels, one preset color each: the layout a hit click loads. */
    applyDefaultLayers() {
        this.layers = [];
        const n = Math.min(MAX_LAYERS, this.channelNames.length);
        for (let i = 0; i < n; i++) {
            this.layers.push({ channel: i, color: PRESET_COLORS[i], threshold: 0 });
        }
    }
    renderRequest() {
        if (this.slideId === null || this.layers.length === 0)
            return null;
        return this.layers.map((l) => ({
            channel: l.channel,
            color: l.color,
            threshold: l.threshold,
        }));
    }
}
/**
 * Latest-wins scheduler for render requests: at most one in flight, at most
 * one queued, intermediate submissions are dropped and stale responses are
 * never applied.
 */
export class LatestWinsQueue {
    constructor() {
        this.seq = 0;
        this.busy = false;
        this.queued = null;
        this.started = 0; // jobs actually run, observable for tests
    }
    submit(job, apply, onError) {
        const mySeq = ++this.seq;
        const run = async () => {
            this.started++;
            try {
                const result = await job();
                if (mySeq === this.seq)
                    apply(result);
            }
            catch (err) {
                if (mySeq === this.seq && onError)
                    onError(err);
            }
        };
        if (this.busy) {
            this.queued = run;
            return;
        }
        this.busy = true;
        const loop = async (first) => {
            let current = first;
            while (current) {
                await current();
                current = this.queued;
                this.queued = null;
            }
            this.busy = false;
        };
        void loop(run);
    }
}
