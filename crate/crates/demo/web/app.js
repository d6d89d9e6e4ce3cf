// Wires the three wasm calls (compile, check, solve) to the page and
// draws the compiled score as a piano roll with violation overlays.

import init, {
  compile_formula,
  check_arrangement,
  solve_arrangement,
} from "./pkg/arranger_demo.js";

const el = (id) => document.getElementById(id);

let score = null;       // parsed score object
let profile = null;     // {p, consonance, max_chord, min_segment}
let included = new Set();
let violations = [];

function profileArgs() {
  return [
    profile.p,
    profile.consonance,
    profile.max_chord ?? 0,
    profile.min_segment ?? 0,
  ];
}

function setStatus(text) {
  el("status").textContent = text;
}

el("variant").addEventListener("change", () => {
  el("j-wrap").hidden = el("variant").value !== "maxchord";
});

el("compile").addEventListener("click", () => {
  const variant = el("variant").value;
  const j = variant === "maxchord" ? Number(el("j").value) : 0;
  const result = JSON.parse(
    compile_formula(el("dimacs").value, variant, el("p").value, j)
  );
  if (!result.ok) {
    setStatus(`compile failed: ${result.error}`);
    return;
  }
  score = result.score;
  profile = result.profile;
  included = new Set(
    Object.entries(result.mapping.roles)
      .filter(([, role]) => role.startsWith("forced_true"))
      .map(([id]) => id)
  );
  setStatus(
    `${score.parts.length} parts, profile: p=${profile.p}` +
      (profile.consonance ? ", consonance" : "") +
      (profile.max_chord ? `, max chord ${profile.max_chord}` : "") +
      (profile.min_segment ? `, min segment ${profile.min_segment} ticks` : "")
  );
  el("solve").disabled = false;
  el("clear").disabled = false;
  el("route").textContent = "";
  renderParts();
  runCheck();
});

el("solve").addEventListener("click", () => {
  const result = JSON.parse(
    solve_arrangement(JSON.stringify(score), ...profileArgs(), 5000)
  );
  if (!result.ok) {
    setStatus(`solve failed: ${result.error}`);
    return;
  }
  const report = result.report;
  el("route").textContent = `route: ${report.route}, status: ${report.status}` +
    (report.route === "exact" ? `, ${report.nodes_explored} nodes` : "");
  if (report.status === "sat") {
    included = new Set(report.selection);
    renderParts();
    runCheck();
  }
});

el("clear").addEventListener("click", () => {
  included.clear();
  renderParts();
  runCheck();
});

function renderParts() {
  const box = el("parts");
  box.textContent = "";
  for (const part of score.parts) {
    const label = document.createElement("label");
    const check = document.createElement("input");
    check.type = "checkbox";
    check.checked = included.has(part.id);
    check.addEventListener("change", () => {
      if (check.checked) included.add(part.id);
      else included.delete(part.id);
      runCheck();
    });
    label.append(check, ` ${part.id}`);
    box.append(label);
  }
}

function runCheck() {
  const selection = JSON.stringify({ included: [...included].sort() });
  const result = JSON.parse(
    check_arrangement(JSON.stringify(score), selection, ...profileArgs())
  );
  if (!result.ok) {
    setStatus(`check failed: ${result.error}`);
    return;
  }
  violations = result.violations;
  const verdict = el("verdict");
  if (result.valid) {
    verdict.textContent = "valid arrangement";
    verdict.className = "valid";
  } else {
    verdict.textContent = `invalid: ${violations.length} violation(s)`;
    verdict.className = "invalid";
  }
  el("violations").textContent = violations
    .map((v) => `[${v.start},${v.end}) ${v.kind}: ${v.details}`)
    .join("\n");
  draw();
}

function draw() {
  const canvas = el("roll");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!score || score.parts.length === 0) return;

  const lastTick = Math.max(
    1,
    ...score.parts.flatMap((p) => p.notes.map((n) => n.onset + n.duration))
  );
  const left = 88;
  const laneH = Math.min(34, (canvas.height - 20) / score.parts.length);
  canvas.height = Math.max(120, score.parts.length * laneH + 20);
  const scaleX = (canvas.width - left - 10) / lastTick;
  const x = (tick) => left + tick * scaleX;

  // measure grid (8 beats at the score's resolution)
  const measure = 8 * score.ticks_per_beat;
  ctx.strokeStyle = "#e3e7ed";
  ctx.fillStyle = "#9aa4b2";
  ctx.font = "10px ui-monospace, monospace";
  for (let t = 0; t <= lastTick; t += measure) {
    ctx.beginPath();
    ctx.moveTo(x(t), 10);
    ctx.lineTo(x(t), canvas.height - 10);
    ctx.stroke();
    ctx.fillText(`m${t / measure + 1}`, x(t) + 2, 9);
  }

  // violation spans behind the notes
  for (const v of violations) {
    ctx.fillStyle = "rgba(220, 60, 40, 0.18)";
    ctx.fillRect(x(v.start), 10, Math.max(1, (v.end - v.start) * scaleX), canvas.height - 20);
  }

  score.parts.forEach((part, i) => {
    const top = 10 + i * laneH;
    ctx.fillStyle = "#55606e";
    ctx.font = "11px ui-monospace, monospace";
    ctx.fillText(part.id, 4, top + laneH / 2 + 3, left - 8);
    ctx.strokeStyle = "#eef1f5";
    ctx.beginPath();
    ctx.moveTo(left, top + laneH);
    ctx.lineTo(canvas.width - 10, top + laneH);
    ctx.stroke();

    const active = included.has(part.id);
    for (const n of part.notes) {
      // small vertical offset by pitch class keeps same-lane chords visible
      const off = ((71 - (n.pitch % 12)) / 12) * (laneH - 12);
      ctx.fillStyle = active ? "#3f64b0" : "#c9d0da";
      ctx.fillRect(x(n.onset), top + 2 + off, Math.max(2, n.duration * scaleX - 1), 8);
      if (n.duration * scaleX > 26) {
        ctx.fillStyle = active ? "#ffffff" : "#55606e";
        ctx.font = "8px ui-monospace, monospace";
        ctx.fillText(String(n.pitch), x(n.onset) + 3, top + 9 + off);
      }
    }
  });
}

await init();
setStatus("module loaded — compile a formula to begin");
