import { openStream, ServiceClient } from "./client";
import { Context2D, renderMap } from "./render";
import { inWorldBounds, pixelToWorld, ViewModel } from "./viewmodel";
import { LayerName, StreamMessage } from "./types";

const HTTP_BASE = `${location.protocol}//${location.host}`;
const WS_BASE = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}`;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("canvas 2d context unavailable");
  }
  const vm = new ViewModel();
  const client = new ServiceClient(HTTP_BASE);
  const statusEl = byId<HTMLElement>("status");
  const historyEl = byId<HTMLElement>("history");
  const form = byId<HTMLFormElement>("instruction-form");
  const input = byId<HTMLInputElement>("instruction-input");

  // CanvasRenderingContext2D's style properties are wider than the string
  // styles the renderer uses
  const redraw = () =>
    renderMap(ctx as unknown as Context2D, vm, canvas.width, canvas.height);

  const refreshStatus = () => {
    const phase = vm.snapshot?.phase ?? "-";
    const tick = vm.snapshot?.tick ?? "-";
    statusEl.textContent = `${vm.connection} | phase ${phase} | tick ${tick}`;
  };

  const refreshHistory = () => {
    historyEl.innerHTML = "";
    for (const entry of vm.history.slice(-8)) {
      const li = document.createElement("li");
      li.textContent =
        entry.status === "rejected"
          ? `${entry.text} — rejected: ${entry.reason}`
          : `${entry.text} [${entry.status}]`;
      historyEl.appendChild(li);
    }
  };

  vm.connection = "connecting";
  refreshStatus();
  openStream(WS_BASE, {
    onOpen: () => {
      vm.connection = "connected";
      refreshStatus();
    },
    onClose: () => {
      vm.connection = "disconnected";
      statusEl.textContent = "disconnected — reload to reconnect";
    },
    onMessage: (msg: StreamMessage) => {
      vm.applyMessage(msg);
      refreshStatus();
      redraw();
    },
  });

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = input.value.trim();
    if (!text) {
      return;
    }
    const entry = vm.recordSubmission(text);
    input.value = "";
    refreshHistory();
    client.submitInstruction(text).then((res) => {
      entry.status = res.ok ? "accepted" : "rejected";
      entry.reason = res.error;
      refreshHistory();
    });
  });

  canvas.addEventListener("click", (ev) => {
    if (!vm.snapshot) {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const spec = vm.snapshot.grid_spec;
    const { x, y } = pixelToWorld(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      spec,
      canvas.width,
      canvas.height,
    );
    if (!inWorldBounds(x, y, spec)) {
      statusEl.textContent = "goal outside world bounds";
      return;
    }
    vm.goalCandidate = { x, y };
    client.placeGoal(x, y).then((res) => {
      if (!res.ok) {
        statusEl.textContent = `goal rejected: ${res.error}`;
      }
    });
  });

  for (const name of ["master", "path", "points", "boxes", "frustum"] as LayerName[]) {
    const box = document.getElementById(`layer-${name}`) as HTMLInputElement | null;
    if (box) {
      box.checked = vm.layers[name];
      box.addEventListener("change", () => {
        vm.toggleLayer(name);
        redraw();
      });
    }
  }

  byId<HTMLButtonElement>("pause").addEventListener("click", () => client.pause());
  byId<HTMLButtonElement>("resume").addEventListener("click", () => client.resume());
  byId<HTMLButtonElement>("step").addEventListener("click", () => client.step());
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  main();
}
