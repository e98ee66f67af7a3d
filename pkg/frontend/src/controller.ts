import { ApiClient, ApiError } from "./api.js";
import { addedBoxIndices } from "./diff.js";
import { pollRun, PollOptions } from "./poll.js";
import { ChatMessageJson, LayoutJson, sameLayout } from "./types.js";

export interface UiState {
  sessionId: string | null;
  transcript: ChatMessageJson[];
  layout: LayoutJson | null;
  /** Indices into layout.objects added by the latest turn. */
  highlight: number[];
  /** True while a request is in flight; inputs should be disabled. */
  pending: boolean;
  notice: string | null;
  error: string | null;
  lastRunId: string | null;
  imageUrl: string | null;
}

function initialState(): UiState {
  return {
    sessionId: null,
    transcript: [],
    layout: null,
    highlight: [],
    pending: false,
    notice: null,
    error: null,
    lastRunId: null,
    imageUrl: null,
  };
}

/**
 * Client-side session state. The layout is never edited locally: every
 * geometry change comes from a server response, and the canvas always
 * shows the latest server-confirmed layout. One request may be in
 * flight at a time; calls made while pending are dropped.
 */
export class SessionController {
  readonly state: UiState = initialState();

  constructor(
    private readonly api: ApiClient,
    private readonly onRender: (state: UiState) => void = () => {},
    private readonly pollOptions: PollOptions = {},
  ) {}

  async startDialog(caption: string, language?: string): Promise<void> {
    if (this.state.pending) return;
    if (!caption.trim()) {
      this.state.error = "Enter a caption first.";
      this.render();
      return;
    }
    this.begin();
    try {
      const session = await this.api.startSession(caption, language);
      this.state.sessionId = session.id;
      this.state.transcript = session.messages;
      this.state.layout = session.layout;
      this.state.highlight = [];
      this.state.lastRunId = null;
      this.state.imageUrl = null;
      if (session.diagnostic) {
        this.state.notice = `Layout not updated: ${session.diagnostic.message}`;
      }
    } catch (err) {
      this.fail(err);
    } finally {
      this.finish();
    }
  }

  async sendTurn(instruction: string): Promise<void> {
    if (this.state.pending) return;
    if (!this.state.sessionId) {
      this.state.error = "Start a dialog first.";
      this.render();
      return;
    }
    if (!instruction.trim()) {
      this.state.error = "Enter an instruction first.";
      this.render();
      return;
    }
    const before = this.state.layout;
    // Optimistic: show the outgoing message immediately; the server's
    // transcript replaces it on success, rollback removes it on error.
    this.state.transcript = [...this.state.transcript, { role: "user", content: instruction }];
    this.begin();
    try {
      const session = await this.api.sendTurn(this.state.sessionId, instruction);
      this.state.transcript = session.messages;
      this.state.layout = session.layout;
      if (session.diagnostic) {
        this.state.highlight = [];
        this.state.notice = `Layout unchanged: ${session.diagnostic.message}`;
      } else if (sameLayout(before, session.layout)) {
        this.state.highlight = [];
        this.state.notice = "No change to the layout.";
      } else if (session.layout) {
        this.state.highlight = addedBoxIndices(before, session.layout);
      } else {
        this.state.highlight = [];
      }
    } catch (err) {
      this.state.transcript = this.state.transcript.slice(0, -1);
      this.fail(err);
    } finally {
      this.finish();
    }
  }

  async generate(config?: Record<string, unknown>): Promise<void> {
    if (this.state.pending) return;
    const layout = this.state.layout;
    if (!layout) {
      this.state.error = "No layout to generate from.";
      this.render();
      return;
    }
    this.begin();
    try {
      const started = await this.api.startGeneration(layout, config);
      this.state.lastRunId = started.id;
      this.render();
      const run = await pollRun((id) => this.api.getRun(id), started.id, this.pollOptions);
      if (run.status === "failed") {
        this.state.error = run.error ?? "Generation failed.";
      } else {
        this.state.imageUrl = this.api.imageUrl(run.id);
      }
    } catch (err) {
      this.fail(err);
    } finally {
      this.finish();
    }
  }

  private begin(): void {
    this.state.pending = true;
    this.state.error = null;
    this.state.notice = null;
    this.render();
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.state.error = `${err.code}: ${err.message}`;
    } else {
      this.state.error = err instanceof Error ? err.message : String(err);
    }
  }

  private finish(): void {
    this.state.pending = false;
    this.render();
  }

  private render(): void {
    this.onRender(this.state);
  }
}
