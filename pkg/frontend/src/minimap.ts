// Circle-pack layout for a document's central concepts. Pure: no DOM.
// Circle area grows with frequency (value = frequency + 1 so that
// zero-frequency concepts still render and monotonicity is preserved).

import { hierarchy, pack } from "d3-hierarchy";
import type { MinimapConcept } from "./api.js";

export interface PackedCircle {
  entity: string;
  degree: number;
  frequency: number;
  anchors: string[];
  x: number;
  y: number;
  r: number;
}

interface PackDatum {
  children?: MinimapConcept[];
}

export function packMinimap(concepts: MinimapConcept[], size: number): PackedCircle[] {
  if (concepts.length === 0) {
    return [];
  }
  const root = hierarchy<PackDatum | MinimapConcept>({ children: concepts }).sum((d) =>
    "entity" in d ? d.frequency + 1 : 0,
  );
  const layout = pack<PackDatum | MinimapConcept>().size([size, size]).padding(size / 60);
  layout(root);
  return root.leaves().map((leaf) => {
    const concept = leaf.data as MinimapConcept;
    return {
      entity: concept.entity,
      degree: concept.degree,
      frequency: concept.frequency,
      anchors: concept.anchors,
      x: leaf.x,
      y: leaf.y,
      r: leaf.r,
    };
  });
}
