import init, { fixture, valueCurve, thresholds, walkPlay } from "./pkg/poorman_wasm.js";

const $ = (id) => document.getElementById(id);

function guard(f) {
  return () => {
    $("error").textContent = "";
    try {
      f();
    } catch (e) {
      $("error").textContent = String(e);
    }
  };
}

// Draws each series as a polyline over a shared x range.
function plot(canvas, xs, series, zeroLine) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const ys = series.flatMap((s) => s.ys.filter((y) => y !== null));
  let lo = Math.min(...ys), hi = Math.max(...ys);
  if (zeroLine) { lo = Math.min(lo, 0); hi = Math.max(hi, 0); }
  if (hi === lo) { hi += 1; lo -= 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1] === x0 ? x0 + 1 : xs[xs.length - 1];
  const px = (x) => 40 + ((x - x0) / (x1 - x0)) * (w - 50);
  const py = (y) => h - 20 - ((y - lo) / (hi - lo)) * (h - 30);
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#555";
  ctx.fillText(hi.toPrecision(3), 2, 14);
  ctx.fillText(lo.toPrecision(3), 2, h - 22);
  if (zeroLine) {
    ctx.strokeStyle = "#bbb";
    ctx.beginPath(); ctx.moveTo(40, py(0)); ctx.lineTo(w - 10, py(0)); ctx.stroke();
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let started = false;
    xs.forEach((x, i) => {
      const y = s.ys[i];
      if (y === null) return;
      if (started) ctx.lineTo(px(x), py(y)); else { ctx.moveTo(px(x), py(y)); started = true; }
    });
    ctx.stroke();
  }
}

function loadPreset() {
  $("game").value = fixture($("preset").value);
}

function drawCurve() {
  const out = JSON.parse(valueCurve($("game").value, Number($("steps").value)));
  const xs = out.points.map((p) => p.r);
  plot($("curve-canvas"), xs, [{ ys: out.points.map((p) => p.value), color: "#1f5fbf" }], true);
  $("curve-info").textContent = `critical ratio ≈ ${out.critical.toFixed(6)}`;
}

function solve() {
  const out = JSON.parse(thresholds($("game").value, $("objective").value, $("target").value));
  const rows = Object.entries(out.th)
    .map(([v, x]) => `<tr><td>${v}</td><td>${x.toFixed(8)}</td><td>${out.witnesses[v].join(" / ")}</td></tr>`)
    .join("");
  $("thresholds").innerHTML =
    `<table><tr><th>vertex</th><th>threshold</th><th>v⁺ / v⁻</th></tr>${rows}</table>` +
    `<p>residual ${out.residual.toExponential(2)} after ${out.sweeps} sweeps</p>`;
}

function play() {
  const out = JSON.parse(
    walkPlay($("game").value, $("share").value, $("adversary").value, Number($("rounds").value), Number($("seed").value)),
  );
  const xs = out.series.map((p) => p.round);
  const energy = out.series.map((p) => p.energy / Math.max(1, p.round));
  plot($("play-canvas"), xs, [
    { ys: energy, color: "#1f5fbf" },
    { ys: out.series.map((p) => p.share - 0.5), color: "#c05a00" },
  ], true);
  const m = out.monitor;
  $("play-info").textContent =
    `blue: energy/round, orange: Max share − 1/2. Max won ${out.max_wins}, Min won ${out.min_wins}; ` +
    `tail average ${out.tail_min === null ? "n/a" : out.tail_min.toFixed(4)}; ` +
    `monitor violations ${m.ratio_violations + m.x_violations + m.energy_violations + m.missing}` +
    (out.error ? `; stopped: ${out.error}` : "");
}

await init();
$("preset").addEventListener("change", guard(loadPreset));
$("curve").addEventListener("click", guard(drawCurve));
$("solve").addEventListener("click", guard(solve));
$("play").addEventListener("click", guard(play));
guard(loadPreset)();
