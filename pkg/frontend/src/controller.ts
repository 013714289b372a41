// Orchestrates API calls, the view state machine, and event recording.
// The scripted end-to-end test drives this controller exactly like the
// rendered UI does.

import type { ApiClient, Collection, Detail, DocumentText, EdgeRelations, Minimap } from "./api.js";
import type { EventRecorder } from "./events.js";
import { focusPartition, type FocusPartition } from "./focus.js";
import { ViewStateMachine } from "./state.js";

export class ExplorerController {
  readonly machine: ViewStateMachine;
  private minimapCache: Minimap | null = null;
  private detailCache: Detail | null = null;
  // one in-flight expand request per session; later clicks queue behind it
  private expandChain: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    readonly graphId: string,
    private readonly recorder: EventRecorder,
  ) {
    this.machine = new ViewStateMachine(recorder);
  }

  async begin(): Promise<Collection> {
    const collection = await this.api.collection(this.graphId);
    this.machine.start();
    return collection;
  }

  openPartition(partitionId: string): void {
    this.machine.openPartition(partitionId);
  }

  async enterDocument(docId: string): Promise<Minimap> {
    const minimap = await this.api.minimap(this.graphId, docId);
    this.machine.openDocument(docId);
    this.minimapCache = minimap;
    return minimap;
  }

  minimap(): Minimap {
    if (this.minimapCache === null) {
      throw new Error("no document entered");
    }
    return this.minimapCache;
  }

  detail(): Detail {
    if (this.detailCache === null) {
      throw new Error("detailed view not loaded");
    }
    return this.detailCache;
  }

  async focusConcept(concept: string): Promise<{ detail: Detail; focus: FocusPartition }> {
    const minimap = this.minimap();
    const detail = await this.api.detail(this.graphId, minimap.doc_id);
    const visible = detail.nodes.filter((n) => n.visible).map((n) => n.entity);
    this.machine.openConcept(
      concept,
      minimap.concepts.map((c) => c.entity),
      visible,
    );
    this.detailCache = detail;
    return { detail, focus: this.currentFocus() };
  }

  async descendWithoutConcept(): Promise<Detail> {
    const minimap = this.minimap();
    const detail = await this.api.detail(this.graphId, minimap.doc_id);
    const visible = detail.nodes.filter((n) => n.visible).map((n) => n.entity);
    this.machine.openDetailed(visible);
    this.detailCache = detail;
    return detail;
  }

  // The opacity partition for the active concept: the server's anchor
  // mapping saturated, everything else blended.
  currentFocus(): FocusPartition {
    const detail = this.detail();
    const concept = this.machine.current().concept;
    const all = detail.nodes.map((n) => n.entity);
    if (concept === null) {
      return focusPartition(all, all);
    }
    const entry = this.minimap().concepts.find((c) => c.entity === concept);
    return focusPartition(all, entry ? entry.anchors : [concept]);
  }

  clickGraphNode(node: string): Promise<string[]> {
    this.machine.clickNode(node);
    const state = this.machine.current();
    const run = async (): Promise<string[]> => {
      const resp = await this.api.expand(
        this.graphId,
        state.docId as string,
        this.recorder.session,
        node,
      );
      this.machine.setVisible(resp.visible);
      return resp.visible;
    };
    const chained = this.expandChain.then(run, run);
    this.expandChain = chained.catch(() => undefined);
    return chained;
  }

  async clickEdge(edgeId: string): Promise<EdgeRelations> {
    this.machine.clickEdge(edgeId);
    return this.api.edgeRelations(this.graphId, edgeId);
  }

  async openArticle(docId: string): Promise<DocumentText> {
    const text = await this.api.documentText(docId);
    this.machine.openArticle(docId);
    return text;
  }

  closeArticle(): void {
    this.machine.closeArticle();
  }

  enterCallout(): void {
    this.machine.enterCallout();
  }

  leaveCallout(): void {
    this.machine.leaveCallout();
  }

  backToDocument(): void {
    this.machine.backToDocument();
  }

  async finish(): Promise<void> {
    this.machine.end();
    await this.recorder.flush();
  }
}
