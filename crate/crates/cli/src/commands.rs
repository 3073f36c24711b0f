//! Command dispatch and result persistence.

use std::fs;
use std::path::{Path, PathBuf};

use grafield::engine::{solve_generalized, GMatrix};
use grafield::linalg::symmetric_eigen;
use grafield::operators::{
    connected_components, diffusion_kernel, type1_gmatrix, type1_identity_target, type2_gmatrix,
    type2_identity_target,
};
use grafield::{
    detect_changepoints, diffusion_map, empirical_vertex_pmf, laplacian_star, lp_rank_cap,
    lp_spectral, modularity, pagerank_matrix, pagerank_scores, reg_laplacian_type2, resolve_tau,
    unified_spectral, BasisSpec, EngineOptions, Graph64, Tau, TauKind,
};
use ndarray::Array2;
use serde_json::{json, Value};

use crate::config::{CommandKind, Operator, RunConfig, DEFAULT_CHANGEPOINT_K, DEFAULT_CHANGEPOINT_M, DEFAULT_COMPONENTS};
use crate::error::{CliError, CliResult};
use crate::format::{rounded, sig};
use crate::io::{parse_edgelist, parse_event_matrix};
use crate::plot::{line_plot, Series};

const PAGERANK_TOL: f64 = 1e-13;

/// Eigenvalues with matching vertex coordinates (`n × k`).
#[derive(Debug, Clone)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub coords: Array2<f64>,
    pub method: String,
    pub tau: Option<(String, f64)>,
}

/// Files written by a run, in the order they were written.
pub type Written = Vec<PathBuf>;

pub fn run(cfg: &RunConfig) -> CliResult<Written> {
    match cfg.command {
        CommandKind::Changepoint => changepoint(cfg),
        CommandKind::Pagerank => pagerank(cfg, &parse_edgelist(&cfg.input)?),
        CommandKind::Compare => compare(cfg, &parse_edgelist(&cfg.input)?),
        CommandKind::Analyze | CommandKind::Embed => {
            let g = parse_edgelist(&cfg.input)?;
            if cfg.operator == Operator::Pagerank {
                return pagerank(cfg, &g);
            }
            spectral_command(cfg, &g)
        }
    }
}

/// Creates `dir` on first use, so runs that fail on input leave nothing behind.
fn write(dir: &Path, name: &str, body: &str, written: &mut Written) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

fn json_body(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn num(x: f64) -> Value {
    let r = rounded(x);
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

pub fn spectrum_csv(values: &[f64]) -> String {
    let mut s = String::from("k,lambda\n");
    for (k, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{}\n", k + 1, sig(*v)));
    }
    s
}

pub fn embedding_csv(coords: &Array2<f64>) -> String {
    let k = coords.ncols();
    let mut s = String::from("vertex");
    for c in 1..=k {
        s.push_str(&format!(",phi_{c}"));
    }
    s.push('\n');
    for (x, row) in coords.rows().into_iter().enumerate() {
        s.push_str(&(x + 1).to_string());
        for v in row {
            s.push(',');
            s.push_str(&sig(*v));
        }
        s.push('\n');
    }
    s
}

fn resolve(cfg: &RunConfig, g: &Graph64) -> CliResult<(String, f64, Tau<f64>)> {
    let kind = cfg.tau.clone().unwrap_or(TauKind::SteinOptimal);
    let choice = resolve_tau(kind, g.degrees())?;
    let label = choice.kind.to_string();
    Ok((label, choice.value.as_f64(), choice.value))
}

fn finite_tau(cfg: &RunConfig, g: &Graph64) -> CliResult<(String, f64, Tau<f64>)> {
    let (label, value, tau) = resolve(cfg, g)?;
    if tau == Tau::Infinite {
        return Err(CliError::Data(format!(
            "τ preset {label} is infinite for this degree sequence; pass a numeric --tau"
        )));
    }
    Ok((label, value, tau))
}

/// Coordinates constant across vertices belong to the deflated trivial
/// direction of an indicator basis.
fn is_constant(column: ndarray::ArrayView1<'_, f64>) -> bool {
    let (lo, hi) = column.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    hi - lo <= 1e-8 * hi.abs().max(lo.abs()).max(1.0)
}

fn keep_nontrivial(values: &[f64], coords: &Array2<f64>, k: usize) -> (Vec<f64>, Array2<f64>) {
    let keep: Vec<usize> = (0..values.len()).filter(|&c| !is_constant(coords.column(c))).take(k).collect();
    let vals = keep.iter().map(|&c| values[c]).collect();
    let cols = Array2::from_shape_fn((coords.nrows(), keep.len()), |(x, j)| coords[[x, keep[j]]]);
    (vals, cols)
}

fn gmatrix_embedding(gm: &GMatrix<f64>, k: usize) -> CliResult<(Vec<f64>, Array2<f64>)> {
    let want = (k + 1).min(gm.basis.m());
    let solved = solve_generalized(gm, want, Default::default())?;
    let v = gm.basis.to_dense();
    let coords = solved.theta.t().dot(&v).reversed_axes();
    Ok(keep_nontrivial(&solved.values, &coords, k))
}

pub fn spectral(cfg: &RunConfig, g: &Graph64) -> CliResult<Spectral> {
    let n = g.n();
    let k = cfg.k.unwrap_or(DEFAULT_COMPONENTS.min(n.saturating_sub(1)).max(1));
    if let Some(m) = cfg.m {
        let k = cfg.k.unwrap_or(DEFAULT_COMPONENTS.min(m));
        let e = lp_spectral(g, m, k, &EngineOptions::default())?;
        return Ok(Spectral {
            values: e.eigenvalues,
            coords: e.coordinates,
            method: format!("lp(m={m})"),
            tau: None,
        });
    }
    if k >= n {
        return Err(CliError::Data(format!("--k {k} needs at least {} vertices, graph has {n}", k + 1)));
    }
    let with_trivial = (k + 1).min(n);
    let options = EngineOptions::default();
    let (values, coords, method, tau) = match cfg.operator {
        Operator::Laplacian | Operator::Modularity => {
            let basis = if cfg.operator == Operator::Laplacian {
                BasisSpec::BlockPulse
            } else {
                BasisSpec::Characteristic
            };
            let e = unified_spectral(g, basis, None, with_trivial, &options)?;
            let (v, c) = keep_nontrivial(&e.eigenvalues, &e.coordinates, k);
            (v, c, e.method.to_string(), None)
        }
        Operator::Diffusion => {
            let dc = diffusion_map(g, cfg.t as f64, with_trivial)?;
            let (v, c) = keep_nontrivial(&dc.eigenvalues, &dc.coords, k);
            (v, c, format!("diffusion(t={})", cfg.t), None)
        }
        Operator::Type1 => {
            let (label, value, tau) = finite_tau(cfg, g)?;
            let (v, c) = gmatrix_embedding(&type1_gmatrix(g, &tau)?, k)?;
            (v, c, "type1".to_string(), Some((label, value)))
        }
        Operator::Type2 => {
            let (label, value, tau) = resolve(cfg, g)?;
            let (v, c) = gmatrix_embedding(&type2_gmatrix(g, &tau)?, k)?;
            (v, c, "type2".to_string(), Some((label, value)))
        }
        Operator::Pagerank => unreachable!("pagerank has its own command path"),
    };
    Ok(Spectral { values, coords, method, tau })
}

fn spectral_command(cfg: &RunConfig, g: &Graph64) -> CliResult<Written> {
    if cfg.tau.is_some() && !matches!(cfg.operator, Operator::Type1 | Operator::Type2) {
        log::warn!("--tau is ignored by the {} operator", cfg.operator.name());
    }
    let s = spectral(cfg, g)?;
    let mut written = Vec::new();
    write(&cfg.out, "spectrum.csv", &spectrum_csv(&s.values), &mut written)?;
    write(&cfg.out, "embedding.csv", &embedding_csv(&s.coords), &mut written)?;
    if cfg.command == CommandKind::Embed {
        return Ok(written);
    }
    let phi1: Vec<f64> = if s.coords.ncols() > 0 { s.coords.column(0).to_vec() } else { Vec::new() };
    let title = format!("{} leading coordinate", s.method);
    let svg = line_plot(&title, &[Series { values: &phi1, color: "#d62728", label: "phi_1" }], &[]);
    write(&cfg.out, "plot.svg", &svg, &mut written)?;
    let mut report = json!({
        "command": cfg.command.name(),
        "input": cfg.input.display().to_string(),
        "operator": cfg.operator.name(),
        "method": s.method,
        "n": g.n(),
        "edges": g.adjacency().upper_entries().len(),
        "volume": num(*g.volume()),
        "components": connected_components(g),
        "isolated_vertices": g.zero_degree_vertices().iter().map(|x| x + 1).collect::<Vec<_>>(),
        "k": s.values.len(),
        "eigenvalues": nums(&s.values),
        "seed": cfg.seed,
    });
    if let Some((label, value)) = &s.tau {
        report["tau"] = json!({ "preset": label, "value": num(*value) });
    }
    if cfg.operator == Operator::Diffusion {
        report["t"] = json!(cfg.t);
    }
    if let Some(m) = cfg.m {
        report["m"] = json!(m);
        report["compression_ratio"] = num(g.n() as f64 / m as f64);
    }
    write(&cfg.out, "report.json", &json_body(&report), &mut written)?;
    Ok(written)
}

fn pagerank(cfg: &RunConfig, g: &Graph64) -> CliResult<Written> {
    let scores = pagerank_scores(g, cfg.alpha, PAGERANK_TOL)?;
    let p = scores.probs();
    let mut csv = String::from("vertex,score\n");
    for (x, s) in p.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", x + 1, sig(*s)));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let top: Vec<Value> = order
        .iter()
        .take(10)
        .map(|&x| json!({ "vertex": x + 1, "score": num(p[x]) }))
        .collect();
    let report = json!({
        "command": cfg.command.name(),
        "input": cfg.input.display().to_string(),
        "operator": "pagerank",
        "alpha": num(cfg.alpha),
        "n": g.n(),
        "sum": num(p.iter().sum()),
        "top": top,
        "seed": cfg.seed,
    });
    let mut written = Vec::new();
    write(&cfg.out, "pagerank.csv", &csv, &mut written)?;
    write(&cfg.out, "report.json", &json_body(&report), &mut written)?;
    Ok(written)
}

fn changepoint(cfg: &RunConfig) -> CliResult<Written> {
    let z = parse_event_matrix(&cfg.input)?;
    let m = cfg.m.unwrap_or(DEFAULT_CHANGEPOINT_M);
    let k = cfg.k.unwrap_or(DEFAULT_CHANGEPOINT_K);
    let report = detect_changepoints::<f64>(&z, m, k)?;
    let stamps = z.timestamps().unwrap_or(&[]);
    let boundary_stamps: Vec<&str> = report.boundaries.iter().filter_map(|&b| stamps.get(b).map(String::as_str)).collect();

    let mut csv = String::from("vertex,timestamp,phi_1,phi_1_raw,label\n");
    for t in 0..z.n() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t + 1,
            stamps.get(t).map_or("", String::as_str),
            sig(report.phi1[t]),
            sig(report.phi1_raw[t]),
            report.labels[t]
        ));
    }
    let svg = line_plot(
        &format!("T-graph embedding, m = {m}"),
        &[
            Series { values: &report.phi1_raw, color: "#9a9a9a", label: "uncompressed" },
            Series { values: &report.phi1, color: "#d62728", label: "LP smooth" },
        ],
        &report.boundaries,
    );
    let json = json!({
        "command": "changepoint",
        "input": cfg.input.display().to_string(),
        "n": z.n(),
        "d": z.d(),
        "m": m,
        "k": k,
        "boundaries": report.boundaries,
        "boundary_timestamps": boundary_stamps,
        "segments": report.segments(),
        "impurity": num(report.impurity),
        "unstable": report.unstable,
        "constant_rows": report.constant_rows.iter().map(|r| r + 1).collect::<Vec<_>>(),
        "compression_ratio": num(z.n() as f64 / m as f64),
        "seed": cfg.seed,
    });
    if report.unstable {
        log::warn!("segmentation is unstable (impurity {:.3})", report.impurity);
    }
    let mut written = Vec::new();
    write(&cfg.out, "embedding.csv", &csv, &mut written)?;
    write(&cfg.out, "plot.svg", &svg, &mut written)?;
    write(&cfg.out, "report.json", &json_body(&json), &mut written)?;
    Ok(written)
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_abs_vec(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Each check compares the two sides of one identity and reports the
/// largest absolute deviation.
fn compare_checks(cfg: &RunConfig, g: &Graph64) -> Vec<(&'static str, String, Result<f64, String>)> {
    let n = g.n();
    let options = EngineOptions::default();
    let mut out = Vec::new();
    let mut check = |name: &'static str, pair: String, f: &dyn Fn() -> grafield::Result<f64>| {
        out.push((name, pair, f().map_err(|e| e.to_string())));
    };

    check("block_pulse", "spectrum of bpf engine vs eig(L*)".into(), &|| {
        let e = unified_spectral(g, BasisSpec::BlockPulse, None, n, &options)?;
        let direct = symmetric_eigen(&laplacian_star(g)?.matrix)?;
        Ok(max_abs_vec(&sorted(e.eigenvalues), &sorted(direct.values)))
    });
    check("characteristic", "B Θ vs D Θ Λ".into(), &|| {
        let e = unified_spectral(g, BasisSpec::Characteristic, None, n, &options)?;
        let b = modularity(g).matrix;
        let lhs = b.dot(&e.coefficients);
        let rhs = Array2::from_shape_fn(lhs.dim(), |(x, c)| g.degrees()[x] * e.coefficients[[x, c]] * e.eigenvalues[c]);
        Ok(max_abs(&lhs, &rhs))
    });
    let t = cfg.t;
    check("diffusion", format!("N T^{t} D^-1 vs 1 + Σ λ^{t} φ φ"), &|| {
        let dc = diffusion_map(g, t as f64, n)?;
        Ok(max_abs(&dc.kernel_at(t as f64), &diffusion_kernel(g, t)?))
    });
    let tau = resolve(cfg, g).map_err(|e| e.to_string());
    let tau_label = tau.as_ref().map_or_else(|e| e.clone(), |(l, v, _)| format!("{l} = {}", sig(*v)));
    let tau_value = tau.ok().map(|t| t.2);
    check("type1", format!("Type-I G-matrix vs scaled Type-I Laplacian, τ {tau_label}"), &|| {
        let tau = tau_value.clone().ok_or_else(|| grafield::Error::BadShrinkage("unresolved τ".into()))?;
        Ok(max_abs(&type1_gmatrix(g, &tau)?.matrix, &type1_identity_target(g, &tau)?))
    });
    check("type2", format!("Type-II G-matrix vs Type-II Laplacian, τ {tau_label}"), &|| {
        let tau = tau_value.clone().ok_or_else(|| grafield::Error::BadShrinkage("unresolved τ".into()))?;
        Ok(max_abs(&type2_gmatrix(g, &tau)?.matrix, &type2_identity_target(g, &tau)?))
    });
    check("type2_spectrum", "Type-II Laplacian with 1 -> 0 vs G-matrix spectrum".into(), &|| {
        let tau = tau_value.clone().ok_or_else(|| grafield::Error::BadShrinkage("unresolved τ".into()))?;
        let mut l2 = sorted(symmetric_eigen(&reg_laplacian_type2(g, &tau)?.matrix)?.values);
        *l2.last_mut().expect("graph is non-empty") = 0.0;
        let mm = symmetric_eigen(&type2_gmatrix(g, &tau)?.matrix)?.values;
        Ok(max_abs_vec(&sorted(l2), &sorted(mm)))
    });
    let alpha = cfg.alpha;
    check("pagerank", format!("π vs π P, α = {}", sig(alpha)), &|| {
        let pi = pagerank_scores(g, alpha, PAGERANK_TOL)?;
        let p = pagerank_matrix(g, alpha)?.matrix;
        let pi_row = ndarray::Array1::from(pi.probs().to_vec());
        Ok(max_abs_vec(&p.t().dot(&pi_row).to_vec(), pi.probs()))
    });
    check("lp_full_rank", "LP spectrum at full rank vs bpf spectrum".into(), &|| {
        let cap = lp_rank_cap(&empirical_vertex_pmf(g))?;
        if cap + 1 < n {
            return Err(grafield::Error::LpRankExceeded { requested: n - 1, max: cap });
        }
        let lp = lp_spectral(g, cap, cap, &options)?;
        let bpf = unified_spectral(g, BasisSpec::BlockPulse, None, n, &options)?;
        let (nontrivial, _) = keep_nontrivial(&bpf.eigenvalues, &bpf.coordinates, n);
        Ok(max_abs_vec(&sorted(lp.eigenvalues), &sorted(nontrivial)))
    });
    out
}

fn compare(cfg: &RunConfig, g: &Graph64) -> CliResult<Written> {
    let checks = compare_checks(cfg, g);
    let mut rows = Vec::new();
    println!("{:<16} {:>12}  identity", "check", "residual");
    for (name, pair, result) in &checks {
        match result {
            Ok(r) => {
                println!("{name:<16} {:>12}  {pair}", format!("{r:.3e}"));
                rows.push(json!({ "check": name, "identity": pair, "residual": num(*r) }));
            }
            Err(e) => {
                println!("{name:<16} {:>12}  {pair} ({e})", "n/a");
                rows.push(json!({ "check": name, "identity": pair, "residual": Value::Null, "note": e }));
            }
        }
    }
    let report = json!({
        "command": "compare",
        "input": cfg.input.display().to_string(),
        "n": g.n(),
        "alpha": num(cfg.alpha),
        "t": cfg.t,
        "checks": rows,
        "seed": cfg.seed,
    });
    let mut written = Vec::new();
    write(&cfg.out, "report.json", &json_body(&report), &mut written)?;
    Ok(written)
}
