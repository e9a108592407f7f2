import { SessionApi } from './api';
import { App } from './dom';

const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? 'http://127.0.0.1:8080';

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app element');
}

const app = new App(new SessionApi(base), root);
void app.boot().catch((err) => {
  root.textContent = `failed to reach the service at ${base}: ${err}`;
});
