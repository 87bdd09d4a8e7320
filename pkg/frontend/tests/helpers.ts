/** Fixture builders for the e2e test: raw-stack slides and a PNG photo,
 * produced with nothing but Node built-ins so the UI tests stay decoupled
 * from the server implementation. */

import { deflateSync } from "node:zlib";
import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

const CHANNELS = ["DAPI", "CD3", "CD8", "CD20", "CD68", "PANCK", "KI67"];

/** Dark slide-specific texture; structure varies by slide, tone by channel. */
function texture(slideSeed: number, channel: number, size: number): Uint8Array {
	const out = new Uint8Array(size * size);
	for (let y = 0; y < size; y++) {
		for (let x = 0; x < size; x++) {
			const s =
				Math.sin((x + slideSeed * 13) / (9 + slideSeed)) +
				Math.cos((y - slideSeed * 7) / (11 + slideSeed)) +
				Math.sin((x * y) / (700 + 90 * slideSeed));
			const toned = (s + 3) / 6; // 0..1
			const rippled = toned + 0.08 * Math.sin((x + y * (channel + 1)) / 17);
			const v = Math.min(1, Math.max(0, rippled));
			out[y * size + x] = 30 + Math.round(v * 130);
		}
	}
	return out;
}

export function writeRawStackSlides(root: string, nSlides: number, size = 128): string[] {
	const dirs: string[] = [];
	for (let s = 0; s < nSlides; s++) {
		const dir = join(root, `s${s}`);
		mkdirSync(dir, { recursive: true });
		const channels = CHANNELS.map((name, c) => {
			const file = `ch${c}.raw`;
			writeFileSync(join(dir, file), texture(s, c, size));
			return { name, file };
		});
		writeFileSync(
			join(dir, "manifest.json"),
			JSON.stringify({
				width: size,
				height: size,
				bit_depth: 8,
				modality: "MULTIPLEX",
				channels,
			}),
		);
		dirs.push(dir);
	}
	return dirs;
}

// --- minimal RGB PNG writer (filter 0 rows) ---------------------------------

const CRC_TABLE = (() => {
	const table = new Uint32Array(256);
	for (let n = 0; n < 256; n++) {
		let c = n;
		for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
		table[n] = c >>> 0;
	}
	return table;
})();

function crc32(...chunks: Uint8Array[]): number {
	let c = 0xffffffff;
	for (const chunk of chunks) {
		for (const byte of chunk) c = CRC_TABLE[(c ^ byte) & 0xff] ^ (c >>> 8);
	}
	return (c ^ 0xffffffff) >>> 0;
}

function chunk(tag: string, payload: Uint8Array): Uint8Array {
	const out = new Uint8Array(12 + payload.length);
	const view = new DataView(out.buffer);
	view.setUint32(0, payload.length);
	const tagBytes = new TextEncoder().encode(tag);
	out.set(tagBytes, 4);
	out.set(payload, 8);
	view.setUint32(8 + payload.length, crc32(tagBytes, payload));
	return out;
}

export function encodeRgbPng(rgb: Uint8Array, width: number, height: number): Uint8Array {
	const ihdr = new Uint8Array(13);
	const view = new DataView(ihdr.buffer);
	view.setUint32(0, width);
	view.setUint32(4, height);
	ihdr[8] = 8; // bit depth
	ihdr[9] = 2; // color type: RGB
	const raw = new Uint8Array(height * (width * 3 + 1));
	for (let y = 0; y < height; y++) {
		raw[y * (width * 3 + 1)] = 0;
		raw.set(rgb.subarray(y * width * 3, (y + 1) * width * 3), y * (width * 3 + 1) + 1);
	}
	const signature = Uint8Array.from([137, 80, 78, 71, 13, 10, 26, 10]);
	const parts = [
		signature,
		chunk("IHDR", ihdr),
		chunk("IDAT", new Uint8Array(deflateSync(raw))),
		chunk("IEND", new Uint8Array(0)),
	];
	const total = parts.reduce((n, p) => n + p.length, 0);
	const out = new Uint8Array(total);
	let offset = 0;
	for (const p of parts) {
		out.set(p, offset);
		offset += p.length;
	}
	return out;
}

/** A mock capture: slide 0's first channel centered on a white 640x640 field. */
export function photoOfSlide(slideSeed: number, size = 128): Uint8Array {
	const tex = texture(slideSeed, 0, size);
	const side = 640;
	const rgb = new Uint8Array(side * side * 3).fill(255);
	const offset = (side - size) >> 1;
	for (let y = 0; y < size; y++) {
		for (let x = 0; x < size; x++) {
			const v = tex[y * size + x];
			const base = ((y + offset) * side + (x + offset)) * 3;
			rgb[base] = v;
			rgb[base + 1] = v;
			rgb[base + 2] = v;
		}
	}
	return encodeRgbPng(rgb, side, side);
}
