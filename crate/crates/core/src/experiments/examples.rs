//! The four worked examples: Runge on uniform and non-uniform partitions,
//! high-frequency functions versus resolution, smooth functions at K = 20 and
//! the singularity workflow on the piecewise function.

use rayon::prelude::*;

use super::corpus::CorpusFunction;
use super::{pool, DEFAULT_REFINE};
use crate::approximant::{fit_with_cache, ErrorReport};
use crate::error::{Error, Result};
use crate::frame::{ExtensionParams, FrameCache};
use crate::geometry::{Interval, Partition};
use crate::io::{fmt_f64, Cell, Table};
use crate::singularity::{correct, detect, localize_with_cache, DetectionPolicy, Localization};

/// K values of the resolution study.
pub const EX2_K: [usize; 12] = [5, 10, 20, 40, 60, 80, 100, 150, 200, 250, 300, 400];

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleReport {
    pub id: u8,
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
}

/// Runs example `id` (1 to 4) at default parameters.
pub fn run_example(id: u8, workers: usize) -> Result<ExampleReport> {
    let cache = FrameCache::new();
    let params = ExtensionParams::defaults();
    let unit = Interval::new(-1.0, 1.0)?;
    let ctx = Ctx { cache: &cache, params: &params };
    match id {
        1 => example1(&ctx, unit),
        2 => pool(workers)?.install(|| example2(&ctx, unit)),
        3 => example3(&ctx, unit),
        4 => example4(&ctx, unit),
        _ => Err(Error::invalid(format!("examples are numbered 1 to 4, got {id}"))),
    }
}

struct Ctx<'a> {
    cache: &'a FrameCache,
    params: &'a ExtensionParams,
}

impl Ctx<'_> {
    fn error(&self, f: &CorpusFunction, p: &Partition) -> Result<ErrorReport> {
        let src = f.source();
        fit_with_cache(self.cache, &src, p, self.params)?.error_report(&src, DEFAULT_REFINE)
    }
}

fn per_subinterval_table(name: &str, p: &Partition, report: &ErrorReport) -> Table {
    let mut t = Table::new(name, &["k", "a_lo", "a_hi", "max_abs_err"]);
    for (k, e) in report.per_subinterval.iter().enumerate() {
        let (lo, hi) = p.subinterval(k + 1).expect("index within partition");
        t.push(vec![(k + 1).into(), lo.into(), hi.into(), (*e).into()]);
    }
    t
}

fn example1(ctx: &Ctx, unit: Interval) -> Result<ExampleReport> {
    let f = CorpusFunction::parse("f1")?;
    let mut tables = Vec::new();
    let mut summary = Vec::new();
    for k in [4, 8, 12] {
        let p = Partition::uniform(unit, k)?;
        let r = ctx.error(&f, &p)?;
        summary.push(format!("f1 uniform K={k}: global max error {}", fmt_f64(r.global_max)));
        if k == 4 {
            let e = &r.per_subinterval;
            let ratio = e[1].max(e[2]) / e[0].max(e[3]);
            summary.push(format!("f1 uniform K=4: interior/boundary error ratio {}", fmt_f64(ratio)));
        }
        tables.push(per_subinterval_table(&format!("ex1_uniform_k{k}"), &p, &r));
    }
    let p = Partition::with_interior_points(unit, &[-0.5, -0.2, 0.0, 0.2, 0.5])?;
    let r = ctx.error(&f, &p)?;
    summary.push(format!("f1 breakpoints 0,+-0.2,+-0.5,+-1: global max error {}", fmt_f64(r.global_max)));
    tables.push(per_subinterval_table("ex1_nonuniform", &p, &r));
    Ok(ExampleReport { id: 1, tables, summary })
}

fn example2(ctx: &Ctx, unit: Interval) -> Result<ExampleReport> {
    let fs = ["f2", "f3", "f4"].map(|id| CorpusFunction::parse(id).expect("built-in id"));
    let rows = EX2_K
        .par_iter()
        .map(|&k| {
            let p = Partition::uniform(unit, k)?;
            let errs = fs.iter().map(|f| Ok(ctx.error(f, &p)?.global_max)).collect::<Result<Vec<_>>>()?;
            Ok((k, errs))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("ex2_error_vs_m", &["K", "M", "f2", "f3", "f4"]);
    let mut summary = Vec::new();
    for (k, errs) in &rows {
        let mut row = vec![(*k).into(), (k * (ctx.params.m() - 1) + 1).into()];
        row.extend(errs.iter().map(|e| Cell::Float(*e)));
        t.push(row);
    }
    for (j, f) in fs.iter().enumerate() {
        let first = rows.iter().find(|(_, e)| e[j] < 1e-9).map(|(k, _)| *k);
        summary.push(match first {
            Some(k) => format!("{}: error below 1e-9 from K={k}", f.id()),
            None => format!("{}: error never below 1e-9 for K <= {}", f.id(), EX2_K[EX2_K.len() - 1]),
        });
    }
    Ok(ExampleReport { id: 2, tables: vec![t], summary })
}

fn example3(ctx: &Ctx, unit: Interval) -> Result<ExampleReport> {
    let p = Partition::uniform(unit, 20)?;
    let mut t = Table::new("ex3_k20", &["k", "f5", "f6", "f7"]);
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for id in ["f5", "f6", "f7"] {
        let r = ctx.error(&CorpusFunction::parse(id)?, &p)?;
        summary.push(format!("{id} K=20: global max error {}", fmt_f64(r.global_max)));
        reports.push(r);
    }
    for k in 0..20 {
        let mut row = vec![Cell::from(k + 1)];
        row.extend(reports.iter().map(|r| Cell::Float(r.per_subinterval[k])));
        t.push(row);
    }
    Ok(ExampleReport { id: 3, tables: vec![t], summary })
}

/// Outcome of the detect, localize and correct pipeline for one function.
#[derive(Debug, Clone)]
pub struct SingularRun {
    pub norms: Vec<f64>,
    pub flagged: Vec<usize>,
    pub localizations: Vec<Localization>,
    /// Flagged boundary subintervals that could not be localized.
    pub unlocalized: Vec<usize>,
    pub before: ErrorReport,
    pub after: ErrorReport,
    /// Corrected error ignoring points within one node spacing of each breakpoint.
    pub after_excluding: ErrorReport,
    pub node_spacing: f64,
}

/// Fits `f`, flags subintervals with `policy`, localizes and corrects every
/// flagged interior subinterval.
pub fn singular_pipeline(
    cache: &FrameCache,
    f: &crate::approximant::FunctionSource,
    p: &Partition,
    params: &ExtensionParams,
    policy: &DetectionPolicy,
    refine: usize,
) -> Result<SingularRun> {
    let apx = fit_with_cache(cache, f, p, params)?;
    let flagged = detect(&apx, policy)?;
    let mut localizations = Vec::new();
    let mut unlocalized = Vec::new();
    for &k in &flagged {
        match localize_with_cache(cache, &apx, k, f) {
            Ok(l) => localizations.push(l),
            Err(Error::BoundaryUnsupported { k }) => unlocalized.push(k),
            Err(e) => return Err(e),
        }
    }
    let corrected = correct(&apx, &localizations)?;
    let (lo, hi) = p.subinterval(1)?;
    let node_spacing = (hi - lo) / (params.m() - 1) as f64;
    let before = apx.error_report(f, refine)?;
    let (after, after_excluding) = if f.is_callable() {
        (corrected.error_report(f, refine)?, corrected.error_report_excluding(f, refine, node_spacing)?)
    } else {
        (before.clone(), before.clone())
    };
    Ok(SingularRun {
        norms: apx.coefficients().norms().to_vec(),
        flagged,
        localizations,
        unlocalized,
        before,
        after,
        after_excluding,
        node_spacing,
    })
}

fn example4(ctx: &Ctx, unit: Interval) -> Result<ExampleReport> {
    let lit = CorpusFunction::parse("f8lit")?;
    let fix = CorpusFunction::parse("f8fix")?;
    let mut summary = Vec::new();

    let mut errors = Table::new("ex4_errors", &["K", "f8lit", "f8fix"]);
    for k in [1, 20, 21] {
        let p = Partition::uniform(unit, k)?;
        let (a, b) = (ctx.error(&lit, &p)?.global_max, ctx.error(&fix, &p)?.global_max);
        summary.push(format!("K={k}: global max error f8lit {} f8fix {}", fmt_f64(a), fmt_f64(b)));
        errors.push(vec![k.into(), a.into(), b.into()]);
    }

    let p = Partition::uniform(unit, 21)?;
    let policy = DetectionPolicy::default();
    let runs = [&lit, &fix]
        .iter()
        .map(|f| singular_pipeline(ctx.cache, &f.source(), &p, ctx.params, &policy, DEFAULT_REFINE))
        .collect::<Result<Vec<_>>>()?;

    let mut norms = Table::new("ex4_norms", &["k", "f8lit_norm", "f8lit_flagged", "f8fix_norm", "f8fix_flagged"]);
    for k in 0..21 {
        norms.push(vec![
            (k + 1).into(),
            runs[0].norms[k].into(),
            runs[0].flagged.contains(&(k + 1)).into(),
            runs[1].norms[k].into(),
            runs[1].flagged.contains(&(k + 1)).into(),
        ]);
    }
    let mut locs = Table::new("ex4_localization", &["function", "k0", "i0", "x_break", "normL", "normR"]);
    let mut corrected = Table::new("ex4_corrected", &["k", "f8fix_before", "f8fix_after"]);
    for (f, run) in [&lit, &fix].iter().zip(&runs) {
        summary.push(format!("{} K=21: flagged {:?}", f.id(), run.flagged));
        for l in &run.localizations {
            locs.push(vec![
                f.id().into(),
                l.k0.into(),
                l.i0.into(),
                l.x_break.into(),
                l.norm_left().into(),
                l.norm_right().into(),
            ]);
            summary.push(format!("{} K=21: subinterval {} breakpoint at {}", f.id(), l.k0, fmt_f64(l.x_break)));
        }
    }
    let fix_run = &runs[1];
    for k in 0..21 {
        corrected.push(vec![(k + 1).into(), fix_run.before.per_subinterval[k].into(), fix_run.after.per_subinterval[k].into()]);
    }
    summary.push(format!(
        "f8fix K=21 corrected: global max error {} ({} outside one node spacing of the breakpoints)",
        fmt_f64(fix_run.after.global_max),
        fmt_f64(fix_run.after_excluding.global_max)
    ));
    Ok(ExampleReport { id: 4, tables: vec![errors, norms, locs, corrected], summary })
}
