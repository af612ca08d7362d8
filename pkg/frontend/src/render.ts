// Canvas renderers for the two camera panels.
// Front view: 1920x1080 camera frame scaled into the canvas, trigger zones
// and wrist markers. Top-down view: 1280x720 table frame, detection boxes
// (blue rods, yellow rocker arms, matching the annotation colors), scene
// objects and the place marker.

import type { ConsoleModel, WristMarker } from './model.js';

export const FRONT_W = 1920;
export const FRONT_H = 1080;
export const TABLE_W = 1280;
export const TABLE_H = 720;

const ZONE_LABELS: Record<string, string> = {
  stop: 'STOP (L)',
  continue: 'CONTINUE (R)',
  point_left: 'POINT',
  point_right: 'POINT',
};

const CLASS_COLORS: Record<string, string> = {
  rod: '#4da3ff',
  rocker_arm: '#ffd24d',
};

export function drawFrontView(
  canvas: HTMLCanvasElement,
  model: ConsoleModel,
  dragWrist: { side: 'left' | 'right'; x: number; y: number } | null,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const sx = canvas.width / FRONT_W;
  const sy = canvas.height / FRONT_H;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#141a22';
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  for (const zone of model.state?.zones ?? []) {
    const [x0, y0, x1, y1] = zone.rect;
    ctx.strokeStyle = zone.role === 'stop' ? '#ff6b6b' : zone.role === 'continue' ? '#51cf66' : '#74c0fc';
    ctx.lineWidth = 2;
    ctx.strokeRect(x0 * sx, y0 * sy, (x1 - x0) * sx, (y1 - y0) * sy);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.font = '12px sans-serif';
    ctx.fillText(ZONE_LABELS[zone.role] ?? zone.role, x0 * sx + 4, y0 * sy + 14);
  }

  const drawWrist = (marker: WristMarker | null, label: string, color: string) => {
    if (!marker) return;
    ctx.beginPath();
    ctx.arc(marker.x * sx, marker.y * sy, 8, 0, Math.PI * 2);
    ctx.fillStyle = color;
    ctx.fill();
    ctx.fillStyle = '#e9ecef';
    ctx.font = '11px sans-serif';
    ctx.fillText(label, marker.x * sx + 10, marker.y * sy + 4);
  };
  // server echo is the truth; the local drag position is drawn hollow
  drawWrist(model.wrists.left, 'L', '#f783ac');
  drawWrist(model.wrists.right, 'R', '#9775fa');
  if (dragWrist) {
    ctx.beginPath();
    ctx.arc(dragWrist.x * sx, dragWrist.y * sy, 10, 0, Math.PI * 2);
    ctx.strokeStyle = '#fff';
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
}

export function drawTopDown(canvas: HTMLCanvasElement, model: ConsoleModel): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const sx = canvas.width / TABLE_W;
  const sy = canvas.height / TABLE_H;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#20262e';
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  const state = model.state;
  if (state) {
    const [px, py] = state.place_location;
    ctx.strokeStyle = '#868e96';
    ctx.setLineDash([4, 3]);
    ctx.strokeRect(px * sx - 24, py * sy - 24, 48, 48);
    ctx.setLineDash([]);
    ctx.fillStyle = '#868e96';
    ctx.font = '11px sans-serif';
    ctx.fillText('place', px * sx - 12, py * sy + 36);

    for (const object of state.objects) {
      if (object.status === 'with_human') continue;
      const color = CLASS_COLORS[object.class] ?? '#ccc';
      ctx.fillStyle = object.status === 'on_table' ? color : '#495057';
      ctx.beginPath();
      ctx.arc(object.x * sx, object.y * sy, 6, 0, Math.PI * 2);
      ctx.fill();
      ctx.fillStyle = '#adb5bd';
      ctx.font = '10px sans-serif';
      ctx.fillText(String(object.id), object.x * sx + 8, object.y * sy - 6);
    }
  }

  for (const detection of model.detections) {
    const [x0, y0, x1, y1] = detection.bbox;
    ctx.strokeStyle = CLASS_COLORS[detection.class] ?? '#ccc';
    ctx.lineWidth = 1.5;
    ctx.strokeRect(x0 * sx, y0 * sy, (x1 - x0) * sx, (y1 - y0) * sy);
  }
}
