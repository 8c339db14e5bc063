use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use holodimer::glauber::{render_svg_edges, sample, sample_chains, MultiChainReport, SampleReport};
use holodimer::model::SignatureFile;
use holodimer::oracle::{enumerate_conditional, enumerate_vertex_model};
use holodimer::pfaffian::{edge_probabilities, partition_function, SECTORS};
use holodimer::reduction::reduce_model;
use holodimer::signatures::{
    check_bipartite, check_orthogonal, check_orthogonal_periodic, check_realizable_general, Mat2,
};
use holodimer::spectral::{classify_spectral_curve, free_energy, local_probability_infinite, DEFAULT_GRID};
use holodimer::{
    conditional_probability, BaseChange, Classification, Color, ConditionEvent, ConditionOptions, EdgeBases, EdgeType,
    FisherFile, FisherTorus, HoneyTorus, InfiniteTarget, LocalConfig, ModelFile, Observable, OneTwoParams, ReducedCell,
    VertexModel,
};

use crate::error::CliError;
use crate::manifest::{fmt17, json_artifact, manifest_json, Context};

type Res<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ColorArg {
    Black,
    White,
}

impl From<ColorArg> for Color {
    fn from(c: ColorArg) -> Color {
        match c {
            ColorArg::Black => Color::Black,
            ColorArg::White => Color::White,
        }
    }
}

fn parse_config(s: &str) -> Result<LocalConfig, String> {
    s.parse().map_err(|e: holodimer::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got {s:?}"))?;
    Ok((i.trim().parse().map_err(|e| format!("{e}"))?, j.trim().parse().map_err(|e| format!("{e}"))?))
}

fn emit(ctx: &Context, out: Option<&Path>, payload: &impl Serialize) -> Res<()> {
    let text = json_artifact(payload, &ctx.manifest())?;
    write_or_print(out, &text)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Model file, or a bare signature file meaning that signature everywhere.
fn load_model(ctx: &mut Context, path: &Path, n: Option<usize>) -> Res<VertexModel> {
    let bytes = ctx.read(path)?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)?;
    let file = if value.get("w").is_some() {
        let s = serde_json::from_value::<SignatureFile>(value)?.signature()?;
        ModelFile::periodic(1, s, s)
    } else {
        serde_json::from_value::<ModelFile>(value)?
    };
    Ok(file.build(n)?)
}

fn periodic_cell(model: &VertexModel, tol: f64) -> Res<ReducedCell> {
    let (b, w) = model
        .cell()
        .ok_or_else(|| CliError::Validation("this command needs a 1x1-periodic model".into()))?;
    Ok(ReducedCell::orthogonal(b, w, tol).or_else(|_| ReducedCell::solve(b, w))?)
}

/// Bases for the whole torus: the 1x1 solver for periodic models, per-edge
/// rotations from the orthogonal check otherwise.
fn auto_bases(model: &VertexModel, tol: f64) -> Res<Vec<BaseChange>> {
    if model.cell().is_some() {
        return Ok(periodic_cell(model, tol)?.bases.expand(model.lattice()));
    }
    let c = check_orthogonal_periodic(model.lattice(), model.signatures(), tol)?;
    match c.edge_angles {
        Some(a) => Ok(a.iter().map(|&x| BaseChange::rotation(x)).collect()),
        None => Err(CliError::Domain(format!(
            "no orthogonal bases: failing vertices {:?}, failing edges {:?}",
            c.failing_vertices, c.failing_edges
        ))),
    }
}

fn vertex_label(h: &HoneyTorus, v: usize) -> VertexLabel {
    let x = h.vertex(v);
    VertexLabel { vertex: v, i: x.i, j: x.j, color: x.color }
}

#[derive(Serialize)]
struct VertexLabel {
    vertex: usize,
    i: usize,
    j: usize,
    color: Color,
}

// check

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Model or signature JSON file
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    orthogonal: bool,
    #[arg(long)]
    general: bool,
    #[arg(long)]
    bipartite: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OrthogonalVertex {
    #[serde(flatten)]
    at: VertexLabel,
    realizable: bool,
    positively: bool,
    residual: f64,
    angles: [f64; 3],
    edge_angles: [f64; 3],
}

#[derive(Serialize)]
struct OrthogonalReport {
    realizable: bool,
    failing_vertices: Vec<usize>,
    failing_edges: Vec<usize>,
    edge_angles: Option<Vec<f64>>,
    vertices: Vec<OrthogonalVertex>,
}

#[derive(Serialize)]
struct SimpleReport {
    realizable: bool,
    failing_vertices: Vec<usize>,
}

#[derive(Serialize)]
struct CheckReport {
    n: usize,
    tol: f64,
    realizable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    orthogonal: Option<OrthogonalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    general: Option<SimpleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bipartite: Option<SimpleReport>,
}

pub fn check(ctx: &mut Context, a: &CheckArgs) -> Res<()> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Validation("--tol must be positive".into()));
    }
    let model = load_model(ctx, &a.model, None)?;
    let h = model.lattice();
    let sigs = model.signatures();
    let all = !(a.orthogonal || a.general || a.bipartite);
    let mut report = CheckReport { n: model.n(), tol: a.tol, realizable: true, orthogonal: None, general: None, bipartite: None };
    if all || a.orthogonal {
        let p = check_orthogonal_periodic(h, sigs, a.tol)?;
        let vertices = sigs
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let c = check_orthogonal(s, a.tol)?;
                Ok(OrthogonalVertex {
                    at: vertex_label(h, v),
                    realizable: c.realizable,
                    positively: c.positively,
                    residual: c.residual,
                    angles: c.angles,
                    edge_angles: c.edge_angles,
                })
            })
            .collect::<Res<Vec<_>>>()?;
        report.realizable &= p.realizable;
        report.orthogonal = Some(OrthogonalReport {
            realizable: p.realizable,
            failing_vertices: p.failing_vertices,
            failing_edges: p.failing_edges,
            edge_angles: p.edge_angles,
            vertices,
        });
    }
    if all || a.general {
        let failing: Vec<usize> = (0..h.vertex_count())
            .filter(|&v| {
                let [ea, eb, ec] = h.incident(v);
                let nb = |e| &sigs[h.across(v, e)];
                !check_realizable_general(&sigs[v], nb(ea), nb(eb), nb(ec), a.tol)
            })
            .collect();
        report.realizable &= failing.is_empty();
        report.general = Some(SimpleReport { realizable: failing.is_empty(), failing_vertices: failing });
    }
    if all || a.bipartite {
        let failing: Vec<usize> = (0..h.vertex_count()).filter(|&v| !check_bipartite(&sigs[v], a.tol)).collect();
        report.realizable &= failing.is_empty();
        report.bipartite = Some(SimpleReport { realizable: failing.is_empty(), failing_vertices: failing });
    }
    emit(ctx, a.out.as_deref(), &report)
}

// reduce

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    model: PathBuf,
    /// `auto`, or a JSON file {"bases": [[[n0, p0], [n1, p1]], ...]} with one
    /// matrix per edge type or one per edge
    #[arg(long, default_value = "auto")]
    bases: String,
    /// Torus period, overriding the model file's
    #[arg(long)]
    n: Option<usize>,
    /// Scale every triangle to d = 1 and record the removed constant
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize)]
struct BasesFile {
    bases: Vec<Mat2>,
}

/// Vertex-model partition function = matching sum of the file's weights
/// times `sign * exp(ln_abs)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PartitionScale {
    pub ln_abs: f64,
    pub sign: f64,
}

#[derive(Serialize)]
struct FisherArtifact {
    #[serde(flatten)]
    fisher: FisherFile,
    normalized: bool,
    partition_scale: PartitionScale,
    swapped_edges: Vec<usize>,
    bases: Vec<Mat2>,
}

#[derive(Serialize)]
struct ReduceSummary {
    out: String,
    n: usize,
    normalized: bool,
    partition_scale: PartitionScale,
    swapped_edges: Vec<usize>,
}

pub fn reduce(ctx: &mut Context, a: &ReduceArgs) -> Res<()> {
    let model = load_model(ctx, &a.model, a.n)?;
    let h = model.lattice();
    let bases = if a.bases == "auto" {
        auto_bases(&model, a.tol)?
    } else {
        let file: BasesFile = serde_json::from_slice(&ctx.read(Path::new(&a.bases))?)?;
        let list = file.bases.iter().map(|m| BaseChange::from_matrix(*m)).collect::<holodimer::Result<Vec<_>>>()?;
        match list.len() {
            3 => EdgeBases([list[0], list[1], list[2]]).expand(h),
            m if m == h.edge_count() => list,
            m => {
                return Err(CliError::Validation(format!(
                    "bases file has {m} matrices; expected 3 or {}",
                    h.edge_count()
                )))
            }
        }
    };
    let red = reduce_model(&model, &bases)?;
    let (fisher, scale) = if a.normalize {
        let (ln_abs, sign) = red.log_scale();
        (red.fisher.normalized(), PartitionScale { ln_abs, sign })
    } else {
        (red.fisher.clone(), PartitionScale { ln_abs: 0.0, sign: 1.0 })
    };
    let artifact = FisherArtifact {
        fisher: FisherFile::from_torus(&fisher),
        normalized: a.normalize,
        partition_scale: scale,
        swapped_edges: red.swapped.clone(),
        bases: red.bases.iter().map(|b| b.matrix()).collect(),
    };
    emit(ctx, Some(&a.out), &artifact)?;
    let summary = ReduceSummary {
        out: a.out.display().to_string(),
        n: model.n(),
        normalized: a.normalize,
        partition_scale: scale,
        swapped_edges: red.swapped,
    };
    emit(ctx, None, &summary)
}

// partition

#[derive(Deserialize)]
struct FisherInput {
    #[serde(flatten)]
    file: FisherFile,
    #[serde(default)]
    partition_scale: Option<PartitionScale>,
}

fn load_fisher(ctx: &mut Context, path: &Path) -> Res<(FisherTorus, Option<PartitionScale>)> {
    let input: FisherInput = serde_json::from_slice(&ctx.read(path)?)?;
    Ok((input.file.build()?, input.partition_scale))
}

/// The same torus at period `n`, tiling the cell when the weights are
/// 1x1-periodic.
fn retile(f: FisherTorus, n: Option<usize>) -> Res<FisherTorus> {
    let Some(n) = n.filter(|&n| n != f.n()) else { return Ok(f) };
    let w = f.weights();
    let periodic = w.iter().enumerate().all(|(v, t)| *t == w[v % 2]);
    if !periodic {
        return Err(CliError::Validation(format!(
            "--n {n} differs from the file's period {} and the weights are not 1x1-periodic",
            f.n()
        )));
    }
    Ok(FisherTorus::uniform(n, w[0], w[1])?)
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[arg(long)]
    fisher: PathBuf,
    /// Torus period; a 1x1-periodic file is tiled to this size
    #[arg(long)]
    n: Option<usize>,
    /// Fisher edge indices whose joint probability is reported
    #[arg(long, value_delimiter = ',')]
    edges: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn partition(ctx: &mut Context, a: &PartitionArgs) -> Res<()> {
    let (f, scale) = load_fisher(ctx, &a.fisher)?;
    let f = retile(f, a.n)?;
    let r = partition_function(&f);
    let mut rows = vec!["quantity,theta,tau,coefficient,sign,ln_abs,value".to_string()];
    for (k, &(t, u)) in SECTORS.iter().enumerate() {
        let p = r.sector_pfaffians[k];
        rows.push(format!(
            "pfaffian,{t},{u},{},{},{},{}",
            fmt17(0.5 * r.sign_pattern[k] as f64),
            p.sign,
            fmt17(p.ln_abs),
            fmt17(p.value())
        ));
    }
    let mut scalar = |name: &str, v: holodimer::LogValue| {
        rows.push(format!("{name},,,,{},{},{}", v.sign, fmt17(v.ln_abs), fmt17(v.value())));
    };
    scalar("z", r.log_z);
    let weighted = r.log_unnormalized();
    scalar("z_weights", weighted);
    if let Some(s) = scale {
        scalar("z_vertex_model", weighted.mul(holodimer::LogValue { sign: s.sign, ln_abs: s.ln_abs }));
    }
    if !a.edges.is_empty() {
        let p = edge_probabilities(&f, &a.edges)?;
        rows.push(format!("edge_probability,,,,,,{}", fmt17(p)));
    }
    let text = format!("# manifest: {}\n{}\n", manifest_json(&ctx.manifest()), rows.join("\n"));
    write_or_print(a.out.as_deref(), &text)
}

// free-energy

#[derive(Args, Debug)]
pub struct FreeEnergyArgs {
    #[arg(long)]
    fisher: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FreeEnergyReport {
    value: f64,
    error_estimate: f64,
    classification: Classification,
    grid: usize,
    products: [f64; 3],
    /// `ln |d_black d_white|`, the per-cell shift back to the file's weights.
    log_d_per_cell: f64,
    value_weights: f64,
}

pub fn free_energy_cmd(ctx: &mut Context, a: &FreeEnergyArgs) -> Res<()> {
    ctx.grid = vec![a.grid, a.grid / 2];
    let (f, _) = load_fisher(ctx, &a.fisher)?;
    let cell = f
        .cell_weights()
        .ok_or_else(|| CliError::Validation("free energy needs 1x1-periodic weights".into()))?;
    let products = cell.products();
    let fe = free_energy(products, a.grid)?;
    let log_d = (f.triangle(0).d * f.triangle(1).d).abs().ln();
    let report = FreeEnergyReport {
        value: fe.value,
        error_estimate: fe.error_estimate,
        classification: fe.classification,
        grid: fe.grid,
        products,
        log_d_per_cell: log_d,
        value_weights: fe.value + log_d,
    };
    emit(ctx, a.out.as_deref(), &report)
}

// local-prob

#[derive(Args, Debug)]
pub struct LocalProbArgs {
    /// 1x1-periodic model file
    #[arg(long)]
    model: PathBuf,
    /// Local configuration as abc digits, e.g. 011
    #[arg(long, value_parser = parse_config)]
    vertex_config: LocalConfig,
    #[arg(long, value_enum, default_value = "black")]
    color: ColorArg,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct LocalProbReport {
    value: f64,
    /// Change from the grid of half the size; absent when that grid is invalid.
    error_estimate: Option<f64>,
    classification: Classification,
    vertex_config: LocalConfig,
    color: Color,
    grid: usize,
    products: [f64; 3],
}

pub fn local_prob(ctx: &mut Context, a: &LocalProbArgs) -> Res<()> {
    let model = load_model(ctx, &a.model, None)?;
    let cell = periodic_cell(&model, a.tol)?;
    let target = [InfiniteTarget { cell: (0, 0), color: a.color.into(), config: a.vertex_config }];
    let value = local_probability_infinite(&cell, &target, a.grid)?;
    let half = a.grid / 2;
    let error_estimate = if half >= 2 && half % 2 == 0 {
        ctx.grid = vec![a.grid, half];
        Some((value - local_probability_infinite(&cell, &target, half)?).abs())
    } else {
        ctx.grid = vec![a.grid];
        None
    };
    let products = cell.products();
    let report = LocalProbReport {
        value,
        error_estimate,
        classification: classify_spectral_curve(products)?.classification,
        vertex_config: a.vertex_config,
        color: a.color.into(),
        grid: a.grid,
        products,
    };
    emit(ctx, a.out.as_deref(), &report)
}

// local-prob-finite

#[derive(Args, Debug)]
pub struct LocalProbFiniteArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    /// Cell coordinates i,j of the target vertex
    #[arg(long, value_parser = parse_pair)]
    at: (usize, usize),
    #[arg(long, value_parser = parse_config)]
    config: LocalConfig,
    #[arg(long, value_enum, default_value = "black")]
    color: ColorArg,
    /// Allow n = 1, where a vertex meets its own neighbors
    #[arg(long)]
    allow_single_cell: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FiniteReport {
    probability: f64,
    variant_terms: Vec<f64>,
    n: usize,
    at: (usize, usize),
    color: Color,
    config: LocalConfig,
}

pub fn local_prob_finite(ctx: &mut Context, a: &LocalProbFiniteArgs) -> Res<()> {
    let model = load_model(ctx, &a.model, Some(a.n))?;
    let h = model.lattice();
    if a.at.0 >= a.n || a.at.1 >= a.n {
        return Err(CliError::Validation(format!("--at {:?} is outside the {n} x {n} torus", a.at, n = a.n)));
    }
    let v = match Color::from(a.color) {
        Color::Black => h.black(a.at.0, a.at.1),
        Color::White => h.white(a.at.0, a.at.1),
    };
    let red = reduce_model(&model, &auto_bases(&model, a.tol)?)?;
    let event = ConditionEvent::new(h, vec![(v, a.config)])?;
    let r = conditional_probability(
        &model,
        &red,
        &event,
        ConditionOptions { allow_single_cell: a.allow_single_cell },
    )?;
    let report = FiniteReport {
        probability: r.probability,
        variant_terms: r.variant_terms,
        n: a.n,
        at: a.at,
        color: a.color.into(),
        config: a.config,
    };
    emit(ctx, a.out.as_deref(), &report)
}

// sample

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent chains with seeds seed, seed + 1, ...
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Drawing of the final state of the first chain
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SampleOutput {
    Single(SampleReport),
    Multi(MultiChainReport),
}

fn sample_observables() -> Vec<Observable> {
    let mut obs: Vec<Observable> = EdgeType::ALL.iter().map(|&t| Observable::DimerDensity { edge_type: t }).collect();
    obs.extend(LocalConfig::all().map(|c| Observable::ConfigDensity { color: Color::Black, config: c }));
    obs
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn sample_cmd(ctx: &mut Context, a: &SampleArgs) -> Res<()> {
    ctx.seed = Some(a.seed);
    let params = OneTwoParams::new(a.a, a.b, a.c)?;
    if a.chains == 0 {
        return Err(CliError::Validation("--chains must be at least 1".into()));
    }
    let obs = sample_observables();
    let (output, occupied) = if a.chains == 1 {
        let (report, _) = sample(&params, a.n, a.steps, a.seed, &obs)?;
        let occ = report.final_occupied.clone();
        (SampleOutput::Single(report), occ)
    } else {
        let seeds: Vec<u64> = (0..a.chains as u64).map(|k| a.seed.wrapping_add(k)).collect();
        let report = sample_chains(&params, a.n, a.steps, &seeds, &obs)?;
        let occ = report.chains[0].final_occupied.clone();
        (SampleOutput::Multi(report), occ)
    };
    if let Some(path) = &a.svg {
        let h = HoneyTorus::new(a.n)?;
        let svg = render_svg_edges(&h, |e| occupied.binary_search(&e).is_ok());
        let meta = format!("<metadata>{}</metadata>\n", xml_escape(&manifest_json(&ctx.manifest())));
        let svg = match svg.find(">\n") {
            Some(k) => format!("{}{meta}{}", &svg[..k + 2], &svg[k + 2..]),
            None => svg,
        };
        write_or_print(Some(path), &svg)?;
    }
    emit(ctx, a.out.as_deref(), &output)
}

// oracle

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2))]
    n: u64,
    /// Target vertex as i,j,color,config (repeatable), e.g. 0,0,black,011
    #[arg(long, value_parser = parse_event)]
    event: Vec<(usize, usize, Color, LocalConfig)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_event(s: &str) -> Result<(usize, usize, Color, LocalConfig), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [i, j, color, config] = parts[..] else {
        return Err(format!("expected i,j,color,config, got {s:?}"));
    };
    let color = match color {
        "black" => Color::Black,
        "white" => Color::White,
        other => return Err(format!("color must be black or white, got {other:?}")),
    };
    Ok((i.parse().map_err(|e| format!("{e}"))?, j.parse().map_err(|e| format!("{e}"))?, color, parse_config(config)?))
}

#[derive(Serialize)]
struct Marginal {
    #[serde(flatten)]
    at: VertexLabel,
    /// Indexed by configuration 000 .. 111.
    probabilities: [f64; 8],
}

#[derive(Serialize)]
struct OracleReport {
    n: usize,
    partition: f64,
    config_count: usize,
    marginals: Option<Vec<Marginal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    event_probability: Option<f64>,
}

pub fn oracle(ctx: &mut Context, a: &OracleArgs) -> Res<()> {
    let model = load_model(ctx, &a.model, Some(a.n as usize))?;
    let h = model.lattice();
    let rep = enumerate_vertex_model(&model)?;
    let event_probability = if a.event.is_empty() {
        None
    } else {
        let mut targets = Vec::new();
        for &(i, j, color, config) in &a.event {
            if i >= h.n() || j >= h.n() {
                return Err(CliError::Validation(format!("event vertex ({i}, {j}) is outside the torus")));
            }
            let v = match color {
                Color::Black => h.black(i, j),
                Color::White => h.white(i, j),
            };
            targets.push((v, config));
        }
        Some(enumerate_conditional(&model, &targets)?)
    };
    let report = OracleReport {
        n: model.n(),
        partition: rep.partition,
        config_count: rep.config_count,
        marginals: rep.marginals.map(|m| {
            m.into_iter()
                .enumerate()
                .map(|(v, probabilities)| Marginal { at: vertex_label(h, v), probabilities })
                .collect()
        }),
        event_probability,
    };
    emit(ctx, a.out.as_deref(), &report)
}
