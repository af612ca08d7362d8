// Message schema for the cogest session service (protocol v1).
// Mirrors docs/protocol.md; trace records and stream records share fields.

export interface SessionDescriptor {
  session_id: string;
  started_at: number;
  status: 'running' | 'ended';
  protocol_version: number;
  time_scale: number;
}

export interface ZoneInfo {
  role: 'stop' | 'continue' | 'point_left' | 'point_right';
  rect: [number, number, number, number];
  wrist: 'left' | 'right' | 'either';
  debounce_frames: number;
}

export interface SceneObject {
  id: number;
  class: 'rod' | 'rocker_arm';
  x: number;
  y: number;
  status: 'on_table' | 'in_gripper' | 'placed' | 'with_human';
}

export interface WorkcellState {
  clock: number;
  phase: string;
  resume_phase: string | null;
  gripper_object: number | null;
  queue: { command: string; object_id: number | null }[];
  active: { command: string; object_id: number | null } | null;
  objects: SceneObject[];
  place_location: [number, number];
  consumed_ids: number[];
  zones: ZoneInfo[];
}

export interface DetectionBox {
  id: number;
  class: 'rod' | 'rocker_arm';
  bbox: [number, number, number, number];
  confidence: number;
}

// Server -> client stream messages.
export interface SnapshotMessage {
  type: 'snapshot';
  session_id: string;
  server_seq: number;
  state: WorkcellState;
}

export interface RecordMessage {
  type: 'record';
  session_id: string;
  server_seq: number;
  seq: number;
  t: number;
  kind: string;
  [field: string]: unknown;
}

export interface ErrorMessage {
  type: 'error';
  code: string;
  detail: string;
  t?: number;
}

export interface AckMessage {
  type: 'ack';
  acked: string;
  client_seq: number | null;
}

export interface SessionEndedMessage {
  type: 'session_ended';
}

export type ServerMessage =
  | SnapshotMessage
  | RecordMessage
  | ErrorMessage
  | AckMessage
  | SessionEndedMessage;

// Client -> server messages.
export type ClientMessage =
  | { type: 'say'; text: string; client_seq?: number }
  | { type: 'wrist'; side: 'left' | 'right'; x: number; y: number; client_seq?: number }
  | { type: 'point'; x: number; y: number; client_seq?: number }
  | { type: 'halt'; client_seq?: number }
  | { type: 'resume'; client_seq?: number };

export function parseServerMessage(data: string): ServerMessage | null {
  try {
    const parsed = JSON.parse(data);
    if (parsed && typeof parsed.type === 'string') {
      return parsed as ServerMessage;
    }
  } catch (err) {
    console.error('invalid server message:', err);
  }
  return null;
}

// The fixed interaction-protocol phrases offered as quick buttons.
export const QUICK_PHRASES: string[] = [
  'pick rod',
  'place rod',
  'go home',
  'give me another rocker arm',
  'pick up the last rod',
  'give me this rod',
  'give me that rocker arm',
  'stop',
  'pause',
  'continue',
];
