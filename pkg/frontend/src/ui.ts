/**
 * DOM rendering for the annotation session. Items that look like media
 * URIs render as images or videos; everything else renders as text.
 */

import { SessionController, SessionView, Side } from './session.js';

const IMAGE_RE = /\.(png|jpe?g|gif|webp|bmp|svg)(\?.*)?$/i;
const VIDEO_RE = /\.(mp4|webm|ogv|mov)(\?.*)?$/i;

export function renderItem(container: HTMLElement, label: string): void {
  container.textContent = '';
  if (IMAGE_RE.test(label)) {
    const img = document.createElement('img');
    img.src = label;
    img.alt = label;
    container.appendChild(img);
  } else if (VIDEO_RE.test(label)) {
    const video = document.createElement('video');
    video.src = label;
    video.controls = true;
    video.muted = true;
    container.appendChild(video);
  } else {
    const text = document.createElement('div');
    text.className = 'item-text';
    text.textContent = label;
    container.appendChild(text);
  }
}

export interface UiElements {
  left: HTMLElement;
  right: HTMLElement;
  leftButton: HTMLButtonElement;
  rightButton: HTMLButtonElement;
  status: HTMLElement;
  progress: HTMLElement;
  modeBadge: HTMLElement;
}

export function bindUi(controller: SessionController, elements: UiElements): void {
  const choose = (side: Side) => {
    elements.leftButton.disabled = true;
    elements.rightButton.disabled = true;
    void controller.submitChoice(side);
  };
  elements.leftButton.addEventListener('click', () => choose('left'));
  elements.rightButton.addEventListener('click', () => choose('right'));

  controller.subscribe((view: SessionView) => {
    elements.progress.textContent = `${view.votesSubmitted} votes submitted`;
    elements.modeBadge.textContent = view.mode ?? '—';
    elements.modeBadge.dataset.mode = view.mode ?? '';

    const presenting = view.status === 'presenting';
    elements.leftButton.disabled = !presenting;
    elements.rightButton.disabled = !presenting;

    if (view.presentation) {
      const { labels, leftIndex } = view.presentation;
      renderItem(elements.left, labels[leftIndex]);
      renderItem(elements.right, labels[1 - leftIndex]);
    } else {
      elements.left.textContent = '';
      elements.right.textContent = '';
    }

    switch (view.status) {
      case 'loading':
        elements.status.textContent = 'fetching next pair…';
        break;
      case 'presenting':
        elements.status.textContent = 'which is better?';
        break;
      case 'submitting':
        elements.status.textContent = 'recording your vote…';
        break;
      case 'finished':
        elements.status.textContent = 'session complete, thank you!';
        break;
      case 'error':
        elements.status.textContent = `problem: ${view.lastError ?? 'unknown'}`;
        break;
      default:
        elements.status.textContent = '';
    }
    if (view.status === 'presenting' && view.lastError) {
      elements.status.textContent = `vote rejected (${view.lastError}); please choose again`;
    }
  });
}
