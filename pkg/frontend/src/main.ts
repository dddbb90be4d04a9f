/**
 * Entry point: reads ?server=…&experiment=…&annotator=… from the URL,
 * wires the session controller to the page, and starts annotating.
 */

import { ApiClient } from './api.js';
import { SessionController } from './session.js';
import { bindUi } from './ui.js';

function required(params: URLSearchParams, key: string): string {
  const value = params.get(key);
  if (!value) throw new Error(`missing ?${key}= parameter`);
  return value;
}

export function start(): void {
  const params = new URLSearchParams(window.location.search);
  const server = params.get('server') ?? window.location.origin;
  const experiment = required(params, 'experiment');
  const annotator = params.get('annotator') ?? `anon-${Math.random().toString(36).slice(2, 8)}`;

  const api = new ApiClient(server);
  const controller = new SessionController(api, experiment, annotator);

  bindUi(controller, {
    left: document.getElementById('left-item') as HTMLElement,
    right: document.getElementById('right-item') as HTMLElement,
    leftButton: document.getElementById('left-better') as HTMLButtonElement,
    rightButton: document.getElementById('right-better') as HTMLButtonElement,
    status: document.getElementById('status') as HTMLElement,
    progress: document.getElementById('progress') as HTMLElement,
    modeBadge: document.getElementById('mode-badge') as HTMLElement,
  });

  void controller.nextAssignment();
}

if (typeof window !== 'undefined' && typeof document !== 'undefined') {
  window.addEventListener('DOMContentLoaded', start);
}
