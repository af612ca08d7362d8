// Console view model: a reducer over ServerMessages.
// Holds no simulation logic of its own — everything rendered derives from
// the snapshot plus the record stream, so reconnecting and replaying the
// server's messages reproduces the identical view.

import type {
  DetectionBox,
  RecordMessage,
  ServerMessage,
  WorkcellState,
} from './protocol.js';

export interface LogEntry {
  t: number;
  kind: 'utterance' | 'command' | 'error' | 'info';
  text: string;
}

export interface CommandEntry {
  command: string;
  object_id: number | null;
  issued_at: number;
  provenance: Record<string, number>;
}

export interface WristMarker {
  x: number;
  y: number;
}

export type ConnectionStatus = 'connecting' | 'connected' | 'reconnecting' | 'error' | 'ended';

const LOG_LIMIT = 200;

export class ConsoleModel {
  status: ConnectionStatus = 'connecting';
  statusDetail = '';
  state: WorkcellState | null = null;
  detections: DetectionBox[] = [];
  commandLog: CommandEntry[] = [];
  log: LogEntry[] = [];
  wrists: { left: WristMarker | null; right: WristMarker | null } = {
    left: null,
    right: null,
  };
  lastServerSeq = 0;

  apply(message: ServerMessage): void {
    switch (message.type) {
      case 'snapshot':
        this.state = message.state;
        this.lastServerSeq = message.server_seq;
        this.pushLog(message.state.clock, 'info', 'state snapshot received');
        break;
      case 'record':
        this.lastServerSeq = message.server_seq;
        this.applyRecord(message);
        break;
      case 'error':
        this.pushLog(message.t ?? 0, 'error', `${message.code}: ${message.detail}`);
        break;
      case 'ack':
        break; // transport detail, nothing to render
      case 'session_ended':
        this.status = 'ended';
        this.pushLog(this.state?.clock ?? 0, 'info', 'session ended');
        break;
    }
  }

  private applyRecord(record: RecordMessage): void {
    switch (record.kind) {
      case 'utterance':
        this.pushLog(record.t, 'utterance', `"${record.text as string}"`);
        break;
      case 'skeleton': {
        const left = record.wrist_left as [number, number] | null;
        const right = record.wrist_right as [number, number] | null;
        this.wrists.left = left ? { x: left[0], y: left[1] } : null;
        this.wrists.right = right ? { x: right[0], y: right[1] } : null;
        break;
      }
      case 'pointing':
        this.pushLog(record.t, 'info', `pointing at (${record.x}, ${record.y})`);
        break;
      case 'detection_snapshot':
        this.detections = record.detections as DetectionBox[];
        break;
      case 'command': {
        const entry: CommandEntry = {
          command: record.command as string,
          object_id: (record.object_id as number | null) ?? null,
          issued_at: record.issued_at as number,
          provenance: record.provenance as Record<string, number>,
        };
        this.commandLog.push(entry);
        const paired = 'pointing' in entry.provenance ? ' [co-speech]' : '';
        const objectPart = entry.object_id === null ? '' : ` object ${entry.object_id}`;
        this.pushLog(record.t, 'command', `${entry.command}${objectPart}${paired}`);
        if (this.state && entry.object_id !== null) {
          if (!this.state.consumed_ids.includes(entry.object_id)) {
            this.state.consumed_ids.push(entry.object_id);
          }
        }
        break;
      }
      case 'sim_event':
        this.applySimEvent(record);
        break;
      case 'halt':
        this.pushLog(record.t, 'info', 'halt button');
        break;
      case 'resume':
        this.pushLog(record.t, 'info', 'resume button');
        break;
    }
  }

  private applySimEvent(record: RecordMessage): void {
    const data = record.data as Record<string, unknown>;
    const event = record.event as string;
    if (!this.state) return;
    if (event === 'phase_changed') {
      this.state.phase = data.to as string;
      this.state.resume_phase = (data.resume_phase as string | null) ?? null;
      this.pushLog(record.t, 'info', `robot: ${data.from} -> ${data.to}`);
    } else if (event === 'object_moved') {
      const id = data.object_id as number;
      const object = this.state.objects.find((o) => o.id === id);
      if (object) {
        object.status = data.status as SceneObjectStatus;
        const pose = data.pose as [number, number];
        object.x = pose[0];
        object.y = pose[1];
      }
      if (data.status === 'in_gripper') {
        this.state.gripper_object = id;
      } else if (this.state.gripper_object === id) {
        this.state.gripper_object = null;
      }
    } else if (event === 'command_completed') {
      this.pushLog(record.t, 'info', `completed: ${data.command}`);
    } else if (event === 'warning') {
      this.pushLog(record.t, 'error', `warning: ${data.message}`);
    }
  }

  private pushLog(t: number, kind: LogEntry['kind'], text: string): void {
    this.log.push({ t, kind, text });
    if (this.log.length > LOG_LIMIT) {
      this.log.splice(0, this.log.length - LOG_LIMIT);
    }
  }
}

type SceneObjectStatus = 'on_table' | 'in_gripper' | 'placed' | 'with_human';
