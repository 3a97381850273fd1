import { SessionStore } from './store.js';
import { mountApp } from './ui.js';

const root = document.getElementById('app');
if (root) {
  mountApp(root, new SessionStore());
}
