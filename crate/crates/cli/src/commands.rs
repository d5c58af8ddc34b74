use std::fmt::Write as _;

use ctlab_core::analysis::{self, GraphAnalysis};
use ctlab_core::catalog;
use ctlab_core::classify::{self, EnsembleOptions};
use ctlab_core::{Result, WeightedGraph};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::output::{units, Outputs};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Outcome of one command: files to write and whether the run passed.
pub struct Run {
    pub outputs: Outputs,
    pub passed: bool,
    pub summary: String,
}

pub fn execute(command: Command, config: &RunConfig) -> Result<Run> {
    config.validate(command)?;
    match command {
        Command::Gen => gen(config),
        Command::Analyze => analyze(config),
        Command::Classify => classify(config),
        Command::Catalog => run_catalog(config),
    }
}

fn graph_units() -> Vec<(&'static str, &'static str)> {
    vec![("/vertex_count", "vertices"), ("/edge_count", "edges"), ("/volume", "dimensionless")]
}

fn gen(config: &RunConfig) -> Result<Run> {
    let spec = config.family_spec()?;
    let g = spec.generate()?;
    let mut outputs = Outputs::default();
    outputs.add("graph.wgr", g.to_wgr());
    outputs.add_json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "gen",
            "family": spec,
            "vertex_count": g.vertex_count(),
            "edge_count": g.edge_count(),
            "volume": g.volume(),
            "units": units(&graph_units()),
        }),
    );
    let summary = format!("generated {} with {} vertices", spec.family.name(), g.vertex_count());
    Ok(Run { outputs, passed: true, summary })
}

fn analyze(config: &RunConfig) -> Result<Run> {
    let (g, input): (WeightedGraph, Value) = match (&config.graph, &config.family) {
        (Some(path), _) => (WeightedGraph::read_wgr(path)?, json!({ "graph": path })),
        _ => {
            let spec = config.family_spec()?;
            (spec.generate()?, json!({ "family": spec }))
        }
    };
    let (a, metric) = analysis::analyze_graph_with_metric(&g, &config.toggles, &config.budgets, config.seed)?;
    let mut outputs = Outputs::default();
    if let (true, Some(m)) = (config.toggles.resistance, &metric) {
        outputs.add("resistance.csv", m.to_csv());
    }
    if let Some(geo) = &a.geometry {
        outputs.add("scales.dat", scales_table(&a, geo));
    }
    let mut unit_entries: Vec<(String, &str)> =
        analysis::analysis_units().into_iter().map(|(k, v)| (format!("/analysis{k}"), v)).collect();
    unit_entries.sort();
    let unit_refs: Vec<(&str, &str)> = unit_entries.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    outputs.add_json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "analyze",
            "input": input,
            "seed": config.seed,
            "toggles": config.toggles,
            "budgets": config.budgets,
            "analysis": a,
            "units": units(&unit_refs),
        }),
    );
    let summary = match &a.cover {
        Some(c) => format!("t_hit = {}, t_cov = {} ({:?})", a.hitting.t_hit, c.t_cov, c.certainty),
        None => format!("t_hit = {}", a.hitting.t_hit),
    };
    Ok(Run { outputs, passed: true, summary })
}

/// Gnuplot-friendly columns: radius, covering count, packing count.
fn scales_table(a: &GraphAnalysis, geo: &analysis::GeometrySummary) -> String {
    let mut out = format!("# radius_ohms covering packing ({:?} nets, {} vertices)\n", geo.mode, a.vertex_count);
    for s in &geo.scales {
        let count = |c: Option<usize>| c.map_or("-".to_string(), |c| c.to_string());
        let _ = writeln!(out, "{} {} {}", s.radius, count(s.covering), count(s.packing));
    }
    out
}

fn classify(config: &RunConfig) -> Result<Run> {
    let family = &config.family.as_ref().expect("validated").family;
    let master = config.seed.expect("validated");
    let c = &config.classify;
    let options = EnsembleOptions {
        sizes: c.sizes.clone(),
        samples: c.samples,
        budgets: config.budgets.clone(),
        geometry: c.geometry,
    };
    let stats = classify::run_ensemble(family, &options, master)?;
    let report = classify::classify_type(&stats, &c.lambda_grid, c.threshold)?;
    let mut fits = Vec::new();
    for f in &c.fits {
        fits.push(classify::fit_scaling_exponent(&stats, f.model, f.observable)?);
    }
    let mut medians = String::from("# size median_t_cov_steps\n");
    let (sizes, meds) = classify::medians_by_size(&stats, classify::Observable::TCov);
    for (s, m) in sizes.iter().zip(&meds) {
        let _ = writeln!(medians, "{s} {m}");
    }
    let mut outputs = Outputs::default();
    outputs.add("stats.csv", stats.to_csv());
    outputs.add("medians.dat", medians);
    outputs.add_json("stats.json", &serde_json::to_value(&stats).expect("stats serialize"));
    outputs.add_json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "classify",
            "family": family,
            "master_seed": master,
            "sizes": stats.sizes,
            "samples": stats.samples,
            "excluded": stats.failures.len(),
            "partial": stats.partial,
            "sandwich_violations": stats.sandwich_violations(),
            "type_report": report,
            "fits": fits,
            "units": units(&[
                ("/type_report/per_size/median_ratio", "dimensionless"),
                ("/type_report/per_size/median_vertex_count", "vertices"),
                ("/type_report/per_size/type1", "frequency"),
                ("/type_report/per_size/type2", "frequency"),
                ("/type_report/log_ratio_slope", "dimensionless"),
                ("/fits/estimate", "dimensionless"),
                ("/fits/medians", "observable units (see observable)"),
            ]),
        }),
    );
    let summary = format!("verdict {:?} over {} records", report.verdict, stats.records.len());
    Ok(Run { outputs, passed: true, summary })
}

fn run_catalog(config: &RunConfig) -> Result<Run> {
    let cfg = config.catalog_config();
    let out = catalog::run_catalog(&cfg)?;
    let mut outputs = Outputs::default();
    let mut report = serde_json::to_value(&out.report).expect("report serializes");
    report["units"] = units(&[
        ("/rows/checks/measured", "per check: steps, ohms or dimensionless as named"),
    ]);
    outputs.add_json("catalog.json", &report);
    outputs.add("catalog.md", out.report.table());
    for (name, csv) in &out.tables {
        outputs.add(format!("ensemble_{name}.csv"), csv.clone());
    }
    let summary = out.report.rows.iter().map(|r| r.summary()).collect::<Vec<_>>().join("\n");
    Ok(Run { outputs, passed: out.report.passed, summary })
}
