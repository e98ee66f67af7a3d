// Wire types mirroring the server's JSON schemas, plus runtime guards.
// Every payload entering the UI goes through a guard so schema drift
// surfaces as a thrown SchemaError (with the offending path) instead of
// silently rendering garbage.

export type BoxTuple = [number, number, number, number];

export interface LayoutObject {
  description: string;
  box: BoxTuple;
}

export interface LayoutJson {
  canvas: [number, number];
  background_prompt: string;
  objects: LayoutObject[];
}

export interface ChatMessageJson {
  role: string;
  content: string;
}

export interface DiagnosticJson {
  kind: string;
  message: string;
}

export interface SessionJson {
  id: string;
  messages: ChatMessageJson[];
  layout: LayoutJson | null;
  diagnostic: DiagnosticJson | null;
  created_at: string;
  updated_at: string;
}

export type RunStatus = "pending" | "layout_done" | "image_done" | "failed";

export interface RunJson {
  id: string;
  caption: string;
  status: RunStatus;
  layout: LayoutJson | null;
  config: Record<string, unknown>;
  error: string | null;
  created_at: string;
  updated_at: string;
  artifacts: string[];
}

export class SchemaError extends Error {
  constructor(path: string, expected: string, got: unknown) {
    super(`${path}: expected ${expected}, got ${JSON.stringify(got)}`);
    this.name = "SchemaError";
  }
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function str(value: unknown, path: string): string {
  if (typeof value !== "string") throw new SchemaError(path, "string", value);
  return value;
}

function num(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(path, "number", value);
  }
  return value;
}

function numPair(value: unknown, path: string): [number, number] {
  if (!Array.isArray(value) || value.length !== 2) {
    throw new SchemaError(path, "[number, number]", value);
  }
  return [num(value[0], `${path}[0]`), num(value[1], `${path}[1]`)];
}

function boxTuple(value: unknown, path: string): BoxTuple {
  if (!Array.isArray(value) || value.length !== 4) {
    throw new SchemaError(path, "[x, y, w, h]", value);
  }
  return [
    num(value[0], `${path}[0]`),
    num(value[1], `${path}[1]`),
    num(value[2], `${path}[2]`),
    num(value[3], `${path}[3]`),
  ];
}

export function asLayout(value: unknown, path = "layout"): LayoutJson {
  if (!isRecord(value)) throw new SchemaError(path, "object", value);
  if (!Array.isArray(value.objects)) {
    throw new SchemaError(`${path}.objects`, "array", value.objects);
  }
  return {
    canvas: numPair(value.canvas, `${path}.canvas`),
    background_prompt: str(value.background_prompt, `${path}.background_prompt`),
    objects: value.objects.map((obj, i) => {
      const objPath = `${path}.objects[${i}]`;
      if (!isRecord(obj)) throw new SchemaError(objPath, "object", obj);
      return {
        description: str(obj.description, `${objPath}.description`),
        box: boxTuple(obj.box, `${objPath}.box`),
      };
    }),
  };
}

function nullable<T>(value: unknown, parse: (v: unknown) => T): T | null {
  return value === null || value === undefined ? null : parse(value);
}

export function asSession(value: unknown): SessionJson {
  if (!isRecord(value)) throw new SchemaError("session", "object", value);
  if (!Array.isArray(value.messages)) {
    throw new SchemaError("session.messages", "array", value.messages);
  }
  return {
    id: str(value.id, "session.id"),
    messages: value.messages.map((msg, i) => {
      const msgPath = `session.messages[${i}]`;
      if (!isRecord(msg)) throw new SchemaError(msgPath, "object", msg);
      return { role: str(msg.role, `${msgPath}.role`), content: str(msg.content, `${msgPath}.content`) };
    }),
    layout: nullable(value.layout, (v) => asLayout(v, "session.layout")),
    diagnostic: nullable(value.diagnostic, (v) => {
      if (!isRecord(v)) throw new SchemaError("session.diagnostic", "object", v);
      return {
        kind: str(v.kind, "session.diagnostic.kind"),
        message: str(v.message, "session.diagnostic.message"),
      };
    }),
    created_at: str(value.created_at, "session.created_at"),
    updated_at: str(value.updated_at, "session.updated_at"),
  };
}

const RUN_STATUSES: readonly string[] = ["pending", "layout_done", "image_done", "failed"];

export function asRun(value: unknown): RunJson {
  if (!isRecord(value)) throw new SchemaError("run", "object", value);
  const status = str(value.status, "run.status");
  if (!RUN_STATUSES.includes(status)) {
    throw new SchemaError("run.status", RUN_STATUSES.join("|"), status);
  }
  if (!Array.isArray(value.artifacts)) {
    throw new SchemaError("run.artifacts", "array", value.artifacts);
  }
  if (!isRecord(value.config)) throw new SchemaError("run.config", "object", value.config);
  return {
    id: str(value.id, "run.id"),
    caption: str(value.caption, "run.caption"),
    status: status as RunStatus,
    layout: nullable(value.layout, (v) => asLayout(v, "run.layout")),
    config: value.config,
    error: value.error === null || value.error === undefined ? null : str(value.error, "run.error"),
    created_at: str(value.created_at, "run.created_at"),
    updated_at: str(value.updated_at, "run.updated_at"),
    artifacts: value.artifacts.map((name, i) => str(name, `run.artifacts[${i}]`)),
  };
}

export function sameLayout(a: LayoutJson | null, b: LayoutJson | null): boolean {
  if (a === null || b === null) return a === b;
  return JSON.stringify(a) === JSON.stringify(b);
}
