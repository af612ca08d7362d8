// Console bootstrap: create/join a session, wire the panels, render on RAF.

import { SessionClient } from './client.js';
import { ConsoleModel } from './model.js';
import { QUICK_PHRASES } from './protocol.js';
import { drawFrontView, drawTopDown, FRONT_H, FRONT_W, TABLE_H, TABLE_W } from './render.js';

const model = new ConsoleModel();
const client = new SessionClient(window.location.origin);

const frontCanvas = document.getElementById('front-view') as HTMLCanvasElement;
const topCanvas = document.getElementById('top-view') as HTMLCanvasElement;
const statusBadge = document.getElementById('status-badge')!;
const phaseBadge = document.getElementById('phase-badge')!;
const logPanel = document.getElementById('command-log')!;
const phraseInput = document.getElementById('phrase-input') as HTMLInputElement;
const quickPhrases = document.getElementById('quick-phrases')!;
const traceLink = document.getElementById('trace-link') as HTMLAnchorElement;

let dragWrist: { side: 'left' | 'right'; x: number; y: number } | null = null;

client.onMessage((message) => model.apply(message));
client.onStatus((status, detail) => {
  model.status = status as ConsoleModel['status'];
  model.statusDetail = detail ?? '';
});

function frontPoint(event: MouseEvent): { x: number; y: number } {
  const rect = frontCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * FRONT_W,
    y: ((event.clientY - rect.top) / rect.height) * FRONT_H,
  };
}

frontCanvas.addEventListener('mousedown', (event) => {
  const point = frontPoint(event);
  // the button picks which wrist is being dragged: left button = left wrist
  const side: 'left' | 'right' = event.button === 2 || event.shiftKey ? 'right' : 'left';
  dragWrist = { side, ...point };
  client.startWristDrag(side, point.x, point.y);
});
frontCanvas.addEventListener('mousemove', (event) => {
  if (!dragWrist) return;
  const point = frontPoint(event);
  dragWrist = { ...dragWrist, ...point };
  client.moveWrist(point.x, point.y);
});
const endDrag = () => {
  dragWrist = null;
  client.stopWristDrag();
};
frontCanvas.addEventListener('mouseup', endDrag);
frontCanvas.addEventListener('mouseleave', endDrag);
frontCanvas.addEventListener('contextmenu', (event) => event.preventDefault());

topCanvas.addEventListener('click', (event) => {
  const rect = topCanvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * TABLE_W;
  const y = ((event.clientY - rect.top) / rect.height) * TABLE_H;
  client.clickObject(x, y);
});

phraseInput.addEventListener('keydown', (event) => {
  if (event.key === 'Enter' && phraseInput.value.trim()) {
    client.sendPhrase(phraseInput.value.trim());
    phraseInput.value = '';
  }
});

for (const phrase of QUICK_PHRASES) {
  const button = document.createElement('button');
  button.textContent = phrase;
  button.addEventListener('click', () => client.sendPhrase(phrase));
  quickPhrases.appendChild(button);
}

document.getElementById('halt-button')!.addEventListener('click', () => client.haltNow());
document.getElementById('resume-button')!.addEventListener('click', () => client.resumeNow());

function renderLog(): void {
  const entries = model.log.slice(-40);
  logPanel.innerHTML = entries
    .map(
      (entry) =>
        `<div class="log-${entry.kind}"><span class="t">${entry.t.toFixed(2)}</span> ${entry.text}</div>`,
    )
    .join('');
  logPanel.scrollTop = logPanel.scrollHeight;
}

function renderBadges(): void {
  statusBadge.textContent = model.status + (model.statusDetail ? ` (${model.statusDetail})` : '');
  statusBadge.className = `badge status-${model.status}`;
  const phase = model.state?.phase ?? '...';
  phaseBadge.textContent = phase;
  phaseBadge.className = `badge phase-${phase}`;
}

function frame(): void {
  drawFrontView(frontCanvas, model, dragWrist);
  drawTopDown(topCanvas, model);
  renderBadges();
  renderLog();
  requestAnimationFrame(frame);
}

async function boot(): Promise<void> {
  try {
    const joined = new URLSearchParams(window.location.search).get('session');
    if (joined) {
      client.connect(joined);
    } else {
      const descriptor = await client.createSession();
      console.log('session created:', descriptor.session_id);
      client.connect();
    }
    traceLink.href = `/api/sessions/${client.sessionId}/trace`;
  } catch (err) {
    model.status = 'error';
    model.statusDetail = String(err);
    console.error('session bootstrap failed:', err);
    setTimeout(boot, 2000); // retry until the service is reachable
  }
}

boot();
requestAnimationFrame(frame);
