// d3 rendering: zoomable circle-pack hierarchy (collection -> partition
// -> document), the document minimap, the force-directed detailed view
// with its persistent callout, and the snippet window.

import * as d3 from "d3";
import type { Collection, Detail, EdgeRelation } from "./api.js";
import type { FocusPartition } from "./focus.js";
import type { PackedCircle } from "./minimap.js";

export const ZOOM_MS = 600; // cosmetic; see frontend README

export interface StageHandlers {
  onPartition(partitionId: string): void;
  onDocument(docId: string): void;
}

interface HierarchyDatum {
  name: string;
  kind: "root" | "partition" | "document";
  id: string;
  value?: number;
  children?: HierarchyDatum[];
}

// Zoomable circle packing over the whole collection. Clicking a
// partition zooms into it; clicking a document hands off to the
// document view.
export function renderCollection(
  svg: SVGSVGElement,
  collection: Collection,
  handlers: StageHandlers,
): void {
  const width = svg.clientWidth || 800;
  const height = svg.clientHeight || 600;
  const data: HierarchyDatum = {
    name: "collection",
    kind: "root",
    id: "",
    children: collection.partitions.map((p) => ({
      name: p.query || p.id,
      kind: "partition" as const,
      id: p.id,
      children: p.documents.map((d) => ({
        name: d.title,
        kind: "document" as const,
        id: d.id,
        value: 1,
      })),
    })),
  };
  const root = d3
    .hierarchy(data)
    .sum((d) => d.value ?? 0)
    .sort((a, b) => (b.value ?? 0) - (a.value ?? 0));
  const packed = d3.pack<HierarchyDatum>().size([width, height]).padding(6)(root);

  const selection = d3.select(svg);
  selection.selectAll("*").remove();
  const g = selection.append("g");

  let focus = packed;
  let view: [number, number, number] = [packed.x, packed.y, packed.r * 2];

  const node = g
    .selectAll("circle")
    .data(packed.descendants())
    .join("circle")
    .attr("class", (d) => `bubble bubble-${d.data.kind}`)
    .on("click", (event: MouseEvent, d) => {
      event.stopPropagation();
      if (d.data.kind === "partition" && focus !== d) {
        zoomTo(d);
        handlers.onPartition(d.data.id);
      } else if (d.data.kind === "document") {
        handlers.onDocument(d.data.id);
      }
    });

  const label = g
    .selectAll("text")
    .data(packed.descendants().filter((d) => d.data.kind !== "root"))
    .join("text")
    .attr("class", "bubble-label")
    .text((d) => d.data.name);

  function layout(v: [number, number, number]): void {
    const k = Math.min(width, height) / v[2];
    node
      .attr("transform", (d) => `translate(${(d.x - v[0]) * k + width / 2},${(d.y - v[1]) * k + height / 2})`)
      .attr("r", (d) => d.r * k);
    label
      .attr("transform", (d) => `translate(${(d.x - v[0]) * k + width / 2},${(d.y - v[1]) * k + height / 2})`)
      .style("display", (d) => (d.parent === focus || d === focus ? "inline" : "none"));
  }

  function zoomTo(target: d3.HierarchyCircularNode<HierarchyDatum>): void {
    focus = target;
    d3.select(svg)
      .transition()
      .duration(ZOOM_MS)
      .tween("zoom", () => {
        const i = d3.interpolateZoom(view, [target.x, target.y, target.r * 2]);
        return (t: number) => {
          view = i(t) as unknown as [number, number, number];
          layout(view);
        };
      });
  }

  selection.on("click", () => zoomTo(packed));
  layout(view);
}

export interface MinimapHandlers {
  onConcept(entity: string): void;
}

// Full-screen document overview: packed concept circles sized by
// frequency, every circle labeled; an empty minimap shows a message
// (the threshold sweep can legitimately return nothing).
export function renderMinimap(
  svg: SVGSVGElement,
  circles: PackedCircle[],
  handlers: MinimapHandlers,
  emptyMessage = "No central concepts for this document.",
): void {
  const selection = d3.select(svg);
  selection.selectAll("*").remove();
  if (circles.length === 0) {
    selection
      .append("text")
      .attr("class", "empty-state")
      .attr("x", "50%")
      .attr("y", "50%")
      .attr("text-anchor", "middle")
      .text(emptyMessage);
    return;
  }
  const group = selection
    .selectAll("g")
    .data(circles)
    .join("g")
    .attr("transform", (d) => `translate(${d.x},${d.y})`)
    .attr("class", "concept")
    .on("click", (_event: MouseEvent, d) => handlers.onConcept(d.entity));
  group.append("circle").attr("r", (d) => d.r);
  group
    .append("text")
    .attr("class", "concept-label")
    .attr("dy", "0.33em")
    .attr("text-anchor", "middle")
    .text((d) => d.entity);
}

export interface GraphHandlers {
  onNodeClick(entity: string): void;
  onEdgeClick(edgeId: string): void;
}

// Force-directed detailed view. Opacity styling derives solely from the
// server-provided focus partition and visible set; hover saturates the
// hovered node's neighborhood on top of that.
export function renderGraph(
  svg: SVGSVGElement,
  detail: Detail,
  focus: FocusPartition,
  visible: Set<string>,
  handlers: GraphHandlers,
): void {
  const width = svg.clientWidth || 800;
  const height = svg.clientHeight || 600;
  const selection = d3.select(svg);
  selection.selectAll("*").remove();
  const g = selection.append("g");

  const nodes = detail.nodes
    .filter((n) => visible.has(n.entity))
    .map((n) => ({ ...n, x: undefined as number | undefined, y: undefined as number | undefined }));
  const index = new Map(nodes.map((n) => [n.entity, n]));
  const links = detail.edges
    .filter((e) => index.has(e.source) && index.has(e.target))
    .map((e) => ({ ...e }));

  const adjacency = new Map<string, Set<string>>();
  for (const e of links) {
    if (!adjacency.has(e.source)) adjacency.set(e.source, new Set());
    if (!adjacency.has(e.target)) adjacency.set(e.target, new Set());
    adjacency.get(e.source)!.add(e.target);
    adjacency.get(e.target)!.add(e.source);
  }

  const simulation = d3
    .forceSimulation(nodes as d3.SimulationNodeDatum[])
    .force(
      "link",
      d3
        .forceLink(links as Array<d3.SimulationLinkDatum<d3.SimulationNodeDatum>>)
        .id((d) => (d as { entity: string }).entity)
        .distance(70),
    )
    .force("charge", d3.forceManyBody().strength(-160))
    .force("center", d3.forceCenter(width / 2, height / 2));

  const link = g
    .selectAll("line")
    .data(links)
    .join("line")
    .attr("class", "edge")
    .on("click", (_event: MouseEvent, d) => handlers.onEdgeClick(d.id));

  const node = g
    .selectAll("g.node")
    .data(nodes)
    .join("g")
    .attr("class", (d) =>
      focus.saturated.has(d.entity) ? "node saturated" : "node blended",
    )
    .on("click", (_event: MouseEvent, d) => handlers.onNodeClick(d.entity))
    .on("pointerenter", (_event: PointerEvent, d) => {
      const hood = adjacency.get(d.entity) ?? new Set<string>();
      node.classed("hover-dim", (n) => n.entity !== d.entity && !hood.has(n.entity));
      link.classed("hover-hot", (l) => l.source === d.entity || l.target === d.entity
        || (l.source as unknown as { entity?: string }).entity === d.entity
        || (l.target as unknown as { entity?: string }).entity === d.entity);
    })
    .on("pointerleave", () => {
      node.classed("hover-dim", false);
      link.classed("hover-hot", false);
    })
    .call(
      d3
        .drag<SVGGElement, (typeof nodes)[number]>()
        .on("drag", (event, d) => {
          (d as d3.SimulationNodeDatum).fx = event.x;
          (d as d3.SimulationNodeDatum).fy = event.y;
          simulation.alpha(0.3).restart();
        })
        .on("end", (_event, d) => {
          (d as d3.SimulationNodeDatum).fx = null;
          (d as d3.SimulationNodeDatum).fy = null;
        }),
    );

  node
    .append("circle")
    .attr("r", (d) => 6 + Math.min(10, d.frequency))
    .attr("class", (d) => (d.central ? "entity central" : "entity"));
  node
    .append("text")
    .attr("class", "node-label")
    .attr("dy", "-1em")
    .attr("text-anchor", "middle")
    .text((d) => d.label);

  simulation.on("tick", () => {
    link
      .attr("x1", (d) => ((d.source as unknown) as { x: number }).x)
      .attr("y1", (d) => ((d.source as unknown) as { y: number }).y)
      .attr("x2", (d) => ((d.target as unknown) as { x: number }).x)
      .attr("y2", (d) => ((d.target as unknown) as { y: number }).y);
    node.attr("transform", (d) => `translate(${(d as d3.SimulationNodeDatum).x},${(d as d3.SimulationNodeDatum).y})`);
  });
}

export interface CalloutHandlers {
  onConcept(entity: string): void;
  onEnter(): void;
  onLeave(): void;
}

// The persistent minimap callout shown beside the detailed view so the
// user keeps a sense of where they are.
export function renderCallout(
  container: HTMLElement,
  circles: PackedCircle[],
  activeConcept: string | null,
  handlers: CalloutHandlers,
): void {
  container.replaceChildren();
  container.onpointerenter = () => handlers.onEnter();
  container.onpointerleave = () => handlers.onLeave();
  const size = 180;
  const svg = d3
    .select(container)
    .append("svg")
    .attr("viewBox", `0 0 ${size} ${size}`)
    .attr("class", "callout-svg");
  const scale = size / 320;
  const group = svg
    .selectAll("g")
    .data(circles)
    .join("g")
    .attr("transform", (d) => `translate(${d.x * scale},${d.y * scale})`)
    .attr("class", (d) => (d.entity === activeConcept ? "concept active" : "concept"))
    .on("click", (_event: MouseEvent, d) => handlers.onConcept(d.entity));
  group.append("circle").attr("r", (d) => Math.max(2, d.r * scale));
  group
    .append("title")
    .text((d) => `${d.entity} (frequency ${d.frequency})`);
}

export interface SnippetHandlers {
  onArticle(docId: string): void;
}

// Lower-left context window listing every relation on the clicked edge,
// each with a link to its source document.
export function renderSnippets(
  container: HTMLElement,
  source: string,
  target: string,
  relations: EdgeRelation[],
  handlers: SnippetHandlers,
): void {
  container.replaceChildren();
  container.classList.remove("hidden");
  const head = document.createElement("h3");
  head.textContent = `${source} — ${target}`;
  container.appendChild(head);
  for (const rel of relations) {
    const row = document.createElement("div");
    row.className = "snippet-row";
    const text = document.createElement("p");
    text.textContent = rel.snippet;
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = "view article";
    link.onclick = (event) => {
      event.preventDefault();
      handlers.onArticle(rel.doc_id);
    };
    row.appendChild(text);
    row.appendChild(link);
    container.appendChild(row);
  }
}

export function hideSnippets(container: HTMLElement): void {
  container.replaceChildren();
  container.classList.add("hidden");
}
