/** Event wiring for the console page.
 *
 * The page skeleton (question form, k selector, results area, error
 * banner, sidebar container) is static HTML; this module fills it in
 * from service responses and nothing else.
 */

import { ServiceError } from "./api.js";
import { LatestOnly } from "./inflight.js";
import type {
  Candidate,
  Dialect,
  PredictResponse,
  SchemaResponse,
  ServiceQuery,
  TranslateResponse,
} from "./types.js";

/** What the app needs from the network layer; ServiceClient satisfies it. */
export interface PredictClient {
  getSchema(): Promise<SchemaResponse>;
  predict(
    question: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<PredictResponse>;
  translate(doc: ServiceQuery, dialect: Dialect): Promise<TranslateResponse>;
}
import {
  renderCandidateCard,
  renderNoInterpretation,
  renderSchemaSidebar,
  showCardError,
  showQueryText,
} from "./view.js";

export interface AppElements {
  form: HTMLFormElement;
  question: HTMLInputElement;
  kSelect: HTMLSelectElement;
  submit: HTMLButtonElement;
  results: HTMLElement;
  banner: HTMLElement;
  sidebar: HTMLElement;
}

export function findElements(doc: Document): AppElements {
  const get = <T extends Element>(selector: string): T => {
    const node = doc.querySelector<T>(selector);
    if (!node) throw new Error(`console page is missing ${selector}`);
    return node;
  };
  return {
    form: get<HTMLFormElement>("#ask"),
    question: get<HTMLInputElement>("#question"),
    kSelect: get<HTMLSelectElement>("#k"),
    submit: get<HTMLButtonElement>("#submit"),
    results: get<HTMLElement>("#results"),
    banner: get<HTMLElement>("#banner"),
    sidebar: get<HTMLElement>("#sidebar"),
  };
}

export class ConsoleApp {
  private readonly pending = new LatestOnly();

  constructor(
    private readonly doc: Document,
    private readonly els: AppElements,
    private readonly client: PredictClient,
  ) {}

  start(): void {
    const { form, question } = this.els;
    question.addEventListener("input", () => this.syncSubmitState());
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitQuestion();
    });
    this.syncSubmitState();
    void this.loadSchema();
  }

  syncSubmitState(): void {
    this.els.submit.disabled = this.els.question.value.trim() === "";
  }

  async loadSchema(): Promise<void> {
    try {
      const schema = await this.client.getSchema();
      this.els.sidebar.replaceChildren(renderSchemaSidebar(this.doc, schema));
    } catch (err) {
      this.showBanner(`schema unavailable: ${(err as Error).message}`);
    }
  }

  /** Submits the current question; superseded responses never render. */
  async submitQuestion(): Promise<void> {
    const question = this.els.question.value.trim();
    if (question === "") return;
    const k = Number(this.els.kSelect.value);
    this.clearBanner();
    let response;
    try {
      response = await this.pending.run((signal) =>
        this.client.predict(question, k, signal),
      );
    } catch (err) {
      // The question stays in the box: nothing below touches the input.
      this.showBanner(this.describe(err));
      return;
    }
    if (response === undefined) return; // superseded by a newer submission
    this.renderCandidates(response.candidates, response.failures);
  }

  renderCandidates(candidates: Candidate[], failures: number): void {
    const { results } = this.els;
    results.replaceChildren();
    if (candidates.length === 0) {
      results.appendChild(renderNoInterpretation(this.doc, failures));
      return;
    }
    candidates.forEach((candidate, index) => {
      const card = renderCandidateCard(this.doc, candidate, index + 1, {
        onTranslate: (c, dialect, node) =>
          void this.translateInto(c, dialect as Dialect, node),
      });
      results.appendChild(card);
    });
  }

  async translateInto(
    candidate: Candidate,
    dialect: Dialect,
    card: HTMLElement,
  ): Promise<void> {
    try {
      const { query_text } = await this.client.translate(
        candidate.query_graph,
        dialect,
      );
      showQueryText(this.doc, card, dialect, query_text);
    } catch (err) {
      showCardError(this.doc, card, this.describe(err));
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ServiceError) {
      return err.status === null ? err.message : `service error: ${err.message}`;
    }
    return (err as Error).message ?? String(err);
  }

  showBanner(message: string): void {
    this.els.banner.textContent = message;
    this.els.banner.hidden = false;
  }

  clearBanner(): void {
    this.els.banner.textContent = "";
    this.els.banner.hidden = true;
  }
}
