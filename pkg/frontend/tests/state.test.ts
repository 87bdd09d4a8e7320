import { describe, expect, it } from "vitest";

import {
	LatestWinsQueue,
	MAX_LAYERS,
	PRESET_COLORS,
	ViewerState,
	isValidColor,
	isValidThreshold,
} from "../src/state.js";

const SEVEN = ["DAPI", "CD3", "CD8", "CD20", "CD68", "PANCK", "KI67"];

describe("ViewerState", () => {
	it("blocks the eighth layer", () => {
		const state = new ViewerState();
		state.setSlide("s0", [...SEVEN, "extra"]);
		for (let i = 0; i < 7; i++) expect(state.addLayer(i)).toBe(true);
		expect(state.canAddLayer).toBe(false);
		expect(state.addLayer(7)).toBe(false);
		expect(state.layers).toHaveLength(MAX_LAYERS);
	});

	it("rejects invalid colors and thresholds", () => {
		const state = new ViewerState();
		state.setSlide("s0", SEVEN);
		state.addLayer(0);
		expect(state.setColor(0, "ZZZZZZ")).toBe(false);
		expect(state.setColor(0, "ff00aa")).toBe(true);
		expect(state.layers[0].color).toBe("FF00AA");
		expect(state.setThreshold(0, -1)).toBe(false);
		expect(state.setThreshold(0, 256)).toBe(false);
		expect(state.setThreshold(0, 128)).toBe(true);
	});

	it("default layer set uses distinct preset colors for the first seven channels", () => {
		const state = new ViewerState();
		state.setSlide("s0", [...SEVEN, "more", "andmore"]);
		state.applyDefaultLayers();
		expect(state.layers).toHaveLength(7);
		expect(new Set(state.layers.map((l) => l.color)).size).toBe(7);
		expect(state.layers.map((l) => l.color)).toEqual(PRESET_COLORS);
	});

	it("render request is null with no slide or no layers", () => {
		const state = new ViewerState();
		expect(state.renderRequest()).toBeNull();
		state.setSlide("s0", SEVEN);
		expect(state.renderRequest()).toBeNull();
		state.addLayer(2);
		expect(state.renderRequest()).toEqual([{ channel: 2, color: "FFFFFF", threshold: 0 }]);
	});

	it("color validation helpers", () => {
		expect(isValidColor("00FF00")).toBe(true);
		expect(isValidColor("#00FF00")).toBe(false);
		expect(isValidColor("00FF0")).toBe(false);
		expect(isValidThreshold(0)).toBe(true);
		expect(isValidThreshold(255)).toBe(true);
		expect(isValidThreshold(12.5)).toBe(false);
	});
});

describe("LatestWinsQueue", () => {
	it("coalesces a burst into first + latest and never applies stale results", async () => {
		const queue = new LatestWinsQueue();
		const applied: string[] = [];
		let release: (() => void) | null = null;
		const blocked = new Promise<void>((resolve) => (release = resolve));

		queue.submit(
			async () => {
				await blocked;
				return "first";
			},
			(v) => applied.push(v),
		);
		for (const name of ["second", "third", "fourth"]) {
			queue.submit(async () => name, (v) => applied.push(v));
		}
		release!();
		await new Promise((resolve) => setTimeout(resolve, 20));
		expect(applied).toEqual(["fourth"]); // first is stale, middle never ran
		expect(queue.started).toBe(2);
	});

	it("single submission applies normally", async () => {
		const queue = new LatestWinsQueue();
		const applied: number[] = [];
		queue.submit(async () => 41, (v) => applied.push(v + 1));
		await new Promise((resolve) => setTimeout(resolve, 10));
		expect(applied).toEqual([42]);
		expect(queue.started).toBe(1);
	});

	it("routes job failures to the error handler", async () => {
		const queue = new LatestWinsQueue();
		const errors: string[] = [];
		queue.submit(
			async () => {

				throw new Error("boom");
			},
			() => {},
			(err) => errors.push((err as Error).message),
		);
		await new Promise((resolve) => setTimeout(resolve, 10));
		expect(errors).toEqual(["boom"]);
	});
});
