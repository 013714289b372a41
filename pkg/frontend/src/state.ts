// View state machine for the layered interface.
//
// UI views: Collection -> Partition -> Document (concept circles) ->
// Detailed (entity graph with a persistent minimap callout). The
// analytics layers are coarser: the three zoomable hierarchy views log
// as "Global", the entity graph as "Detailed", and pointer dwell on the
// callout as "MiniMap". Every counted gesture emits exactly one event
// (edge clicks additionally open the snippet window, logged as
// SnippetView per the logging schema).

export type UiView = "Collection" | "Partition" | "Document" | "Detailed";
export type Layer = "Global" | "MiniMap" | "Detailed";

export interface ViewState {
  view: UiView;
  partitionId: string | null;
  docId: string | null;
  concept: string | null;
  visible: string[];
}

export class StateInvariantError extends Error {}

export class ViewStateMachine {
  private state: ViewState = {
    view: "Collection",
    partitionId: null,
    docId: null,
    concept: null,
    visible: [],
  };
  private layer: Layer | null = null;
  private articleOpen: string | null = null;

  constructor(private readonly sink: EventSinkLike) {}

  current(): ViewState {
    return { ...this.state, visible: [...this.state.visible] };
  }

  activeLayer(): Layer | null {
    return this.layer;
  }

  private enterLayer(layer: Layer): void {
    this.sink.emit("LayerEnter", { view: layer });
    this.layer = layer;
  }

  private exitLayer(): void {
    if (this.layer !== null) {
      this.sink.emit("LayerExit", { view: this.layer });
      this.layer = null;
    }
  }

  start(): void {
    this.sink.emit("TaskStart", {});
    this.state.view = "Collection";
    this.enterLayer("Global");
  }

  openPartition(partitionId: string): void {
    this.requireLayer("Global", "openPartition");
    this.state.view = "Partition";
    this.state.partitionId = partitionId;
  }

  openDocument(docId: string): void {
    this.requireLayer("Global", "openDocument");
    this.state.view = "Document";
    this.state.docId = docId;
    this.state.concept = null;
  }

  // Clicking a concept circle in the Document view: counts as a node
  // click and descends into the focused Detailed view.
  openConcept(concept: string, minimapConcepts: string[], visible: string[]): void {
    if (this.state.view !== "Document" || this.state.docId === null) {
      throw new StateInvariantError("openConcept requires an active Document view");
    }
    if (!minimapConcepts.includes(concept)) {
      throw new StateInvariantError(
        `concept ${concept} is not a minimap concept of ${this.state.docId}`,
      );
    }
    this.sink.emit("NodeClick", { node: concept });
    this.exitLayer();
    this.state.view = "Detailed";
    this.state.concept = concept;
    this.state.visible = [...visible];
    this.enterLayer("Detailed");
  }

  // Descend into the Detailed view without a focused concept.
  openDetailed(visible: string[]): void {
    if (this.state.docId === null) {
      throw new StateInvariantError("Detailed view requires an active document");
    }
    this.exitLayer();
    this.state.view = "Detailed";
    this.state.concept = null;
    this.state.visible = [...visible];
    this.enterLayer("Detailed");
  }

  clickNode(node: string): void {
    this.requireDetailed("clickNode");
    this.sink.emit("NodeClick", { node });
  }

  // Server-echoed visible set after an expand round-trip.
  setVisible(visible: string[]): void {
    this.requireDetailed("setVisible");
    this.state.visible = [...visible];
  }

  clickEdge(edgeId: string): void {
    this.requireDetailed("clickEdge");
    this.sink.emit("EdgeClick", { edge: edgeId });
    this.sink.emit("SnippetView", { edge: edgeId });
  }

  openArticle(docId: string): void {
    if (this.articleOpen !== null) {
      throw new StateInvariantError("an article is already open");
    }
    this.sink.emit("ViewArticle", { doc: docId });
    this.articleOpen = docId;
  }

  closeArticle(): void {
    if (this.articleOpen === null) {
      return;
    }
    this.sink.emit("ViewArticleEnd", { doc: this.articleOpen });
    this.articleOpen = null;
  }

  // Pointer dwell on the persistent callout beside the detailed graph.
  enterCallout(): void {
    this.requireDetailed("enterCallout");
    this.requireLayer("Detailed", "enterCallout");
    this.exitLayer();
    this.enterLayer("MiniMap");
  }

  leaveCallout(): void {
    this.requireDetailed("leaveCallout");
    this.requireLayer("MiniMap", "leaveCallout");
    this.exitLayer();
    this.enterLayer("Detailed");
  }

  backToDocument(): void {
    this.requireDetailed("backToDocument");
    if (this.layer === "MiniMap") {
      this.leaveCallout();
    }
    this.exitLayer();
    this.state.view = "Document";
    this.state.concept = null;
    this.state.visible = [];
    this.enterLayer("Global");
  }

  end(): void {
    this.closeArticle();
    this.exitLayer();
    this.sink.emit("TaskEnd", {});
  }

  private requireDetailed(gesture: string): void {
    if (this.state.view !== "Detailed" || this.state.docId === null) {
      throw new StateInvariantError(`${gesture} requires the Detailed view`);
    }
  }

  private requireLayer(layer: Layer, gesture: string): void {
    if (this.layer !== layer) {
      throw new StateInvariantError(`${gesture} requires the ${layer} layer`);
    }
  }
}

interface EventSinkLike {
  emit(kind: string, payload?: Record<string, unknown>): void;
}
