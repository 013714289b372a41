// Focus styling partition. The saturated set is exactly the server's
// mapping for the concept (itself plus its neighbors within the document
// subgraph); everything else is alpha-blended. The client never derives
// the neighborhood itself.

export interface FocusPartition {
  saturated: Set<string>;
  blended: Set<string>;
}

export function focusPartition(allNodes: Iterable<string>, anchors: Iterable<string>): FocusPartition {
  const saturated = new Set(anchors);
  const blended = new Set<string>();
  for (const node of allNodes) {
    if (!saturated.has(node)) {
      blended.add(node);
    }
  }
  return { saturated, blended };
}
