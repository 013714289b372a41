// Bootstrap: pick a graph, open a session, and wire the layered views.

import { ApiClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { EventRecorder } from "./events.js";
import { packMinimap } from "./minimap.js";
import {
  hideSnippets,
  renderCallout,
  renderCollection,
  renderGraph,
  renderMinimap,
  renderSnippets,
} from "./render.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const graphs = await api.listGraphs();
  const picker = $("graph-picker") as HTMLSelectElement;
  for (const g of graphs) {
    const opt = document.createElement("option");
    const quality = g.quality
      ? ` (P=${g.quality.precision.toFixed(2)} R=${g.quality.recall.toFixed(2)})`
      : "";
    opt.value = g.id;
    opt.textContent = `${g.id}${quality}`;
    picker.appendChild(opt);
  }
  picker.onchange = () => startSession(api, picker.value);
  await startSession(api, graphs[0].id);
}

async function startSession(api: ApiClient, graphId: string): Promise<void> {
  const session = await api.createSession();
  const recorder = new EventRecorder(api, session);
  const controller = new ExplorerController(api, graphId, recorder);

  const stage = $("stage") as unknown as SVGSVGElement & HTMLElement;
  const hierarchySvg = $("hierarchy") as unknown as SVGSVGElement & HTMLElement;
  const detailSection = $("detail-section");
  const graphSvg = $("graph") as unknown as SVGSVGElement & HTMLElement;
  const callout = $("callout");
  const snippets = $("snippets");
  const article = $("article");
  const backButton = $("back") as HTMLButtonElement;
  const statusLine = $("status");

  function showHierarchy(): void {
    detailSection.classList.add("hidden");
    stage.classList.remove("hidden");
    hideSnippets(snippets);
    article.classList.add("hidden");
  }

  function showDetail(): void {
    stage.classList.add("hidden");
    detailSection.classList.remove("hidden");
  }

  function redrawGraph(): void {
    const detail = controller.detail();
    const visible = new Set(controller.machine.current().visible);
    renderGraph(graphSvg, detail, controller.currentFocus(), visible, {
      onNodeClick: (entity) => {
        void controller.clickGraphNode(entity).then(() => redrawGraph());
      },
      onEdgeClick: (edgeId) => {
        void controller.clickEdge(edgeId).then((rel) => {
          renderSnippets(snippets, rel.source, rel.target, rel.relations, {
            onArticle: (docId) => void openArticle(docId),
          });
        });
      },
    });
  }

  async function openArticle(docId: string): Promise<void> {
    const text = await controller.openArticle(docId);
    article.classList.remove("hidden");
    article.replaceChildren();
    const head = document.createElement("h2");
    head.textContent = text.title;
    const body = document.createElement("pre");
    body.textContent = text.body;
    const close = document.createElement("button");
    close.textContent = "close";
    close.onclick = () => {
      controller.closeArticle();
      article.classList.add("hidden");
    };
    article.append(close, head, body);
  }

  async function openDocument(docId: string): Promise<void> {
    const minimap = await controller.enterDocument(docId);
    const circles = packMinimap(minimap.concepts, 320);
    statusLine.textContent = `document ${docId} — choose a central concept`;
    renderMinimap(hierarchySvg, circles, {
      onConcept: (entity) => void focusConcept(entity),
    });
  }

  async function focusConcept(entity: string): Promise<void> {
    await controller.focusConcept(entity);
    showDetail();
    const circles = packMinimap(controller.minimap().concepts, 320);
    renderCallout(callout, circles, entity, {
      onConcept: (other) => {
        if (other !== entity) void refocus(other);
      },
      onEnter: () => controller.enterCallout(),
      onLeave: () => controller.leaveCallout(),
    });
    statusLine.textContent = `detailed view — focused on ${entity}`;
    redrawGraph();
  }

  async function refocus(entity: string): Promise<void> {
    controller.backToDocument();
    await focusConcept(entity);
  }

  backButton.onclick = () => {
    controller.backToDocument();
    showHierarchy();
    void openDocument(controller.machine.current().docId as string);
  };

  const collection = await controller.begin();
  showHierarchy();
  statusLine.textContent = "collection view — click a partition, then a document";
  renderCollection(hierarchySvg, collection, {
    onPartition: (partitionId) => controller.openPartition(partitionId),
    onDocument: (docId) => void openDocument(docId),
  });

  window.addEventListener("pagehide", () => {
    void controller.finish();
  });
}

void boot();
