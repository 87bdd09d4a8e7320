/** Small DOM-adjacent helpers. */
/** Object URL for a blob; null where the runtime lacks createObjectURL (jsdom). */
export function blobUrl(blob) {
    const anyUrl = URL;
    return anyUrl.createObjectURL ? anyUrl.createObjectURL(blob) : null;
}
export function el(doc, tag, className, text) {
    const node = doc.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
