use std::fmt::Write as _;
use std::path::Path;

use locfex::experiments::{
    bench_linear_scaling, bench_table, run_example, run_sweep, singular_pipeline, table1, table2, CorpusFunction,
    N0Probe, SweepSpec, T1Probe,
};
use locfex::io::{
    coefficients_csv, error_csv, error_summary, fmt_f64, localizations_csv, norms_csv, read_tabulated, write_file,
    FitSidecar, Table,
};
use locfex::singularity::DetectionPolicy;
use locfex::{fit_with_cache, Error, ExtensionParams, FrameCache, FunctionSource, Interval, Partition, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::plot::{plot_csv, Scale};
use crate::{BenchArgs, Common, EvalArgs, ExamplesArgs, FitArgs, ParamArgs, PartitionArgs, SingularArgs, SweepArgs};

/// Uniform K used when neither `--K` nor `--breakpoints` is given.
const DEFAULT_K: usize = 20;

/// A resolved function source together with its domain.
struct Problem {
    label: String,
    source: FunctionSource,
    domain: Interval,
    partition: Partition,
    params: ExtensionParams,
}

impl ParamArgs {
    fn build(&self) -> Result<ExtensionParams> {
        if self.refine == 0 {
            return Err(Error::InvalidArgument("--refine must be at least 1".into()));
        }
        ExtensionParams::new(self.t, self.gamma, self.n, self.eps)
    }
}

impl PartitionArgs {
    fn build(&self, domain: Interval) -> Result<Partition> {
        match (&self.k, &self.breakpoints) {
            (Some(k), _) => Partition::uniform(domain, *k),
            (None, Some(points)) => {
                let interior: Vec<f64> =
                    points.iter().copied().filter(|&x| x != domain.a() && x != domain.b()).collect();
                Partition::with_interior_points(domain, &interior)
            }
            (None, None) => Partition::uniform(domain, DEFAULT_K),
        }
    }
}

impl Common {
    fn workers(&self) -> usize {
        match self.workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }

    fn write(&self, table: &Table) -> Result<()> {
        let path = table.write_to(&self.out)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_text(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        write_file(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    /// Renders `<name>.csv` in the output directory to `<name>.svg` when `--plot` is set.
    fn plot(&self, name: &str, x: &str, ys: &[&str], y_scale: Scale) -> Result<()> {
        if !self.plot {
            return Ok(());
        }
        let csv = self.out.join(format!("{name}.csv"));
        let svg = self.out.join(format!("{name}.svg"));
        if plot_csv(&csv, &svg, name, x, ys, y_scale)? {
            println!("wrote {}", svg.display());
        }
        Ok(())
    }
}

impl FitArgs {
    fn problem(&self) -> Result<Problem> {
        let params = self.params.build()?;
        let (label, source, domain) = match (&self.source.function, &self.source.data) {
            (Some(spec), None) => {
                let f = CorpusFunction::parse(spec)?;
                (f.id().to_string(), f.source(), f.domain())
            }
            (None, Some(path)) => {
                let source = read_tabulated(path)?;
                let domain = data_domain(&source, path)?;
                (path.display().to_string(), source, domain)
            }
            _ => return Err(Error::InvalidArgument("give exactly one of --fn and --data".into())),
        };
        let partition = self.partition.build(domain)?;
        Ok(Problem { label, source, domain, partition, params })
    }
}

fn data_domain(source: &FunctionSource, path: &Path) -> Result<Interval> {
    let FunctionSource::Tabulated(t) = source else {
        unreachable!("read_tabulated returns tabulated data")
    };
    let (lo, hi) = t.points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| (lo.min(x), hi.max(x)));
    if t.len() < 2 {
        return Err(Error::InvalidArgument(format!("{}: need at least two samples", path.display())));
    }
    Interval::new(lo, hi)
}

/// Errors on the refined grid for callables, at the data points for tabulated input.
fn report(apx: &locfex::LocalApproximant, pb: &Problem, refine: usize) -> Result<locfex::ErrorReport> {
    match &pb.source {
        FunctionSource::Tabulated(t) => apx.error_report_at(t.points()),
        FunctionSource::Callable(_) => apx.error_report(&pb.source, refine),
    }
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let pb = args.problem()?;
    let cache = FrameCache::new();
    let apx = fit_with_cache(&cache, &pb.source, &pb.partition, &pb.params)?;
    let retained = cache.get(&pb.params)?.retained_count();
    let rep = report(&apx, &pb, args.params.refine)?;
    let out = &args.common;
    out.write_text("coefficients.csv", &coefficients_csv(&apx))?;
    out.write_text("coefficients.json", &FitSidecar::new(&pb.label, &apx, retained).to_json())?;
    out.write_text("errors.csv", &error_csv(&rep))?;
    out.plot("errors", "k", &["max_abs_err"], Scale::Log)?;
    println!("{}: {}", pb.label, error_summary(&rep));
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let pb = args.fit.problem()?;
    let apx = fit_with_cache(&FrameCache::new(), &pb.source, &pb.partition, &pb.params)?;
    let xs = match (&args.x, args.samples) {
        (Some(xs), _) => xs.clone(),
        (None, Some(n)) => {
            let mut rng = StdRng::seed_from_u64(args.fit.common.seed);
            let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(pb.domain.a()..=pb.domain.b())).collect();
            xs.sort_by(f64::total_cmp);
            xs
        }
        (None, None) => return Err(Error::InvalidArgument("eval needs --x or --samples".into())),
    };
    let mut t = Table::new("eval", &["x", "re", "im", "ref_re", "ref_im", "abs_err"]);
    for &x in &xs {
        let y = apx.evaluate(x)?;
        let mut row = vec![x.into(), y.re.into(), y.im.into()];
        match &pb.source {
            FunctionSource::Callable(f) => {
                let r = f(x);
                row.extend([r.re.into(), r.im.into(), (y - r).norm().into()]);
            }
            FunctionSource::Tabulated(_) => row.extend([None::<f64>.into(), None::<f64>.into(), None::<f64>.into()]),
        }
        println!("{} {} {}", fmt_f64(x), fmt_f64(y.re), fmt_f64(y.im));
        t.push(row);
    }
    args.fit.common.write(&t)?;
    args.fit.common.plot("eval", "x", &["re", "im"], Scale::Linear)
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = SweepSpec::from_path(&args.config)?;
    let result = run_sweep(&spec, args.common.workers())?;
    let t = result.to_table("sweep");
    args.common.write(&t)?;
    for row in &result.rows {
        println!("{:?} = {}: max error {}", spec.axis, row.axis_value, fmt_f64(row.max_err));
    }
    args.common.plot("sweep", "axis_value", &["max_err"], Scale::Log)
}

pub fn tables(common: &Common) -> Result<()> {
    let workers = common.workers();
    for t in [table1(&T1Probe::default(), workers)?, table2(&N0Probe::default(), workers)?] {
        common.write(&t)?;
        print!("{}", t.to_csv());
    }
    common.plot("table1", "gamma", &["T1", "reference"], Scale::Linear)?;
    common.plot("table2", "T", &["N0", "reference"], Scale::Linear)
}

pub fn examples(args: &ExamplesArgs) -> Result<()> {
    let ids: Vec<u8> = args.id.map_or_else(|| (1..=4).collect(), |id| vec![id]);
    let mut summary = String::new();
    for id in ids {
        let report = run_example(id, args.common.workers())?;
        for t in &report.tables {
            args.common.write(t)?;
            let ys: Vec<&str> = t.header[1..]
                .iter()
                .map(String::as_str)
                .filter(|h| !matches!(*h, "a_lo" | "a_hi" | "M" | "k0" | "i0" | "x_break"))
                .collect();
            args.common.plot(&t.name, &t.header[0], &ys, Scale::Log)?;
        }
        for line in &report.summary {
            println!("example {id}: {line}");
            let _ = writeln!(summary, "example {id}: {line}");
        }
    }
    args.common.write_text("examples_summary.txt", &summary)
}

pub fn singular(args: &SingularArgs) -> Result<()> {
    let pb = args.fit.problem()?;
    let policy = DetectionPolicy::relative(args.threshold)?;
    let cache = FrameCache::new();
    let run = singular_pipeline(&cache, &pb.source, &pb.partition, &pb.params, &policy, args.fit.params.refine)?;
    let out = &args.fit.common;
    out.write_text("norms.csv", &norms_csv(&run.norms, &run.flagged))?;
    out.write_text("localizations.csv", &localizations_csv(&run.localizations))?;
    let mut t = Table::new("corrected_errors", &["k", "before", "after"]);
    for (k, (b, a)) in run.before.per_subinterval.iter().zip(&run.after.per_subinterval).enumerate() {
        t.push(vec![(k + 1).into(), (*b).into(), (*a).into()]);
    }
    out.write(&t)?;
    out.plot("norms", "k", &["coeff_norm"], Scale::Log)?;
    out.plot("corrected_errors", "k", &["before", "after"], Scale::Log)?;

    if run.flagged.is_empty() {
        println!("{}: no singular subintervals detected", pb.label);
        return Ok(());
    }
    let list: Vec<String> = run.flagged.iter().map(usize::to_string).collect();
    println!("{}: flagged subintervals {}", pb.label, list.join(","));
    for l in &run.localizations {
        println!("subinterval {}: breakpoint at x = {} (node {})", l.k0, fmt_f64(l.x_break), l.i0);
    }
    for k in &run.unlocalized {
        println!("subinterval {k}: boundary subinterval, not localized");
    }
    if pb.source.is_callable() {
        println!("before correction: {}", error_summary(&run.before));
        println!("after correction: {}", error_summary(&run.after));
        println!(
            "after correction, excluding one node spacing around each breakpoint: global max error {}",
            fmt_f64(run.after_excluding.global_max)
        );
    }
    Ok(())
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let params = args.params.build()?;
    let rows = bench_linear_scaling(&args.k, &args.function, &params)?;
    let t = bench_table(&rows);
    args.common.write(&t)?;
    for w in rows.windows(2) {
        println!(
            "K {} -> {}: time ratio {:.3}, factorizations {}",
            w[0].k,
            w[1].k,
            w[1].fit_seconds / w[0].fit_seconds,
            w[1].factorizations
        );
    }
    args.common.plot("bench", "M", &["fit_seconds"], Scale::Linear)
}
