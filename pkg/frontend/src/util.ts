/** Small DOM-adjacent helpers. */

/** Object URL for a blob; null where the runtime lacks createObjectURL (jsdom). */
export function blobUrl(blob: Blob): string | null {
	const anyUrl = URL as unknown as { createObjectURL?: (b: Blob) => string };
	return anyUrl.createObjectURL ? anyUrl.createObjectURL(blob) : null;
}

export function el<K extends keyof HTMLElementTagNameMap>(
	doc: Document,
	tag: K,
	className?: string,
	text?: string,
): HTMLElementTagNameMap[K] {
	const node = doc.createElement(tag);
	if (className) node.className = className;
	if (text !== undefined) node.textContent = text;
	return node;
}
