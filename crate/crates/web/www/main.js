import init, { summarize, rouge, kmeans } from "./pkg/vedsum_web.js";

const $ = (id) => document.getElementById(id);
const splitBlocks = (text) => text.split(/^\s*---\s*$/m).map((s) => s.trim()).filter(Boolean);
const pct = (x) => (x * 100).toFixed(2);

function showError(target, err) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(err);
  target.append(p);
}

function scoreTable(scores) {
  const table = document.createElement("table");
  table.innerHTML = "<tr><th></th><th>P</th><th>R</th><th>F</th><th>ref</th></tr>";
  for (const [label, s] of [["ROUGE-1", scores.rouge1], ["ROUGE-2", scores.rouge2]]) {
    const tr = table.insertRow();
    for (const v of [label, pct(s.precision), pct(s.recall), pct(s.f1), s.reference + 1]) {
      tr.insertCell().textContent = v;
    }
  }
  return table;
}

function runSummarize() {
  const out = $("sum-out");
  try {
    const input = {
      documents: splitBlocks($("docs").value),
      references: splitBlocks($("refs").value),
      k: Number($("k").value),
      seed: Number($("seed").value),
      dim: Number($("dim").value),
    };
    const result = JSON.parse(summarize(JSON.stringify(input)));
    out.innerHTML = "";
    const h = document.createElement("h3");
    h.textContent = "Summary";
    const p = document.createElement("p");
    p.textContent = result.summary;
    const ol = document.createElement("ol");
    ol.start = 0;
    for (const s of result.sentences) {
      const li = document.createElement("li");
      li.textContent = `[d${s.doc + 1}] ${s.text}`;
      if (s.selected) li.className = "sel";
      ol.append(li);
    }
    out.append(h, p);
    if (result.scores) out.append(scoreTable(result.scores));
    out.append(ol);
  } catch (err) {
    showError(out, err);
  }
}

function runRouge() {
  const out = $("rouge-out");
  try {
    const input = {
      candidate: $("cand").value,
      references: $("rouge-refs").value.split("\n").filter((l) => l.trim()),
    };
    out.innerHTML = "";
    out.append(scoreTable(JSON.parse(rouge(JSON.stringify(input)))));
  } catch (err) {
    showError(out, err);
  }
}

const points = [];
let fit = null;
const palette = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

function draw() {
  const canvas = $("plane");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  points.forEach(([x, y], i) => {
    ctx.fillStyle = fit ? palette[fit.assignments[i] % palette.length] : "#333";
    ctx.beginPath();
    ctx.arc(x, y, fit && fit.nearest.includes(i) ? 7 : 4, 0, 2 * Math.PI);
    ctx.fill();
  });
  if (!fit) return;
  fit.centroids.forEach(([x, y], c) => {
    ctx.strokeStyle = palette[c % palette.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x - 8, y - 8); ctx.lineTo(x + 8, y + 8);
    ctx.moveTo(x + 8, y - 8); ctx.lineTo(x - 8, y + 8);
    ctx.stroke();
  });
}

function runKMeans() {
  const out = $("km-out");
  try {
    const input = { points, k: Number($("km-k").value), seed: Number($("km-seed").value) };
    fit = JSON.parse(kmeans(JSON.stringify(input)));
    out.textContent =
      `iterations ${fit.iterations}, inertia ${fit.inertia.toFixed(2)}, ` +
      `history ${fit.inertia_history.map((v) => v.toFixed(1)).join(" → ")}`;
  } catch (err) {
    fit = null;
    showError(out, err);
  }
  draw();
}

await init();
$("run-sum").onclick = runSummarize;
$("run-rouge").onclick = runRouge;
$("run-km").onclick = runKMeans;
$("clear-km").onclick = () => { points.length = 0; fit = null; $("km-out").textContent = ""; draw(); };
$("plane").onclick = (e) => {
  const rect = e.target.getBoundingClientRect();
  points.push([e.clientX - rect.left, e.clientY - rect.top]);
  fit = null;
  draw();
};
