use qisg::analysis::{default_resolution, residual_norm, uniform_grid, MAX_GRID_DIM};
use qisg::dyadic::point_to_f64;
use qisg::experiment::{
    cardinality_table, run_benchmark, run_selftest, run_witness, BenchConfig, Fixture, WitnessConfig, WitnessKind,
};
use qisg::testfuncs::builtin_function;
use qisg::{enumerate_grid, recover as recover_samples, recover_fn, HierCoeffs, QIScheme};
use serde::Serialize;

use crate::io::{self, CliResult, Failure, Kind};
use crate::{BenchmarkArgs, FixtureArg, Format, GridArgs, LevelArgs, OutputArgs, RecoverArgs, SchemeArgs, WitnessArg, WitnessArgs};

/// The scheme file: loadable again through `--mask`.
#[derive(Serialize)]
struct SchemeReport {
    name: String,
    ell: u32,
    mu: usize,
    lambda: Vec<String>,
    p_lambda: String,
    p_even_prime: String,
    p_odd_prime: String,
    p_even: String,
    p_odd: String,
    p_even_star: String,
    p_odd_star: String,
    mask_norm: String,
    p_even_star_norm: String,
    p_odd_star_norm: String,
    lebesgue_constant: f64,
    warnings: Vec<String>,
}

fn scheme_report(scheme: &QIScheme) -> SchemeReport {
    let sym = scheme.symbols();
    SchemeReport {
        name: scheme.name().into(),
        ell: scheme.ell(),
        mu: scheme.mu(),
        lambda: (-(scheme.mu() as i64)..=scheme.mu() as i64).map(|j| scheme.lambda(j).to_string()).collect(),
        p_lambda: sym.p_lambda.to_string(),
        p_even_prime: sym.p_even_prime.to_string(),
        p_odd_prime: sym.p_odd_prime.to_string(),
        p_even: sym.p_even.to_string(),
        p_odd: sym.p_odd.to_string(),
        p_even_star: sym.p_even_star.to_string(),
        p_odd_star: sym.p_odd_star.to_string(),
        mask_norm: scheme.mask_norm().to_string(),
        p_even_star_norm: sym.p_even_star.coeff_abs_sum().to_string(),
        p_odd_star_norm: sym.p_odd_star.coeff_abs_sum().to_string(),
        lebesgue_constant: scheme.lebesgue_constant(4096),
        warnings: scheme.warnings().to_vec(),
    }
}

pub fn derive_scheme(args: &SchemeArgs, output: &OutputArgs) -> CliResult<()> {
    let scheme = io::load_scheme(args)?;
    let report = scheme_report(&scheme);
    let json = io::to_json(&report);
    match output.format {
        Format::Json => print!("{json}"),
        Format::Csv => {
            println!("scheme      {} (ℓ = {}, μ = {})", report.name, report.ell, report.mu);
            println!("lambda      {}", report.lambda.join(", "));
            println!("P_Λ         {}", report.p_lambda);
            println!("P'_even     {}", report.p_even_prime);
            println!("P'_odd      {}", report.p_odd_prime);
            println!("P*_even     {}", report.p_even_star);
            println!("P*_odd      {}", report.p_odd_star);
            println!("‖Λ‖         {}", report.mask_norm);
            println!("‖P*_even‖   {}", report.p_even_star_norm);
            println!("‖P*_odd‖    {}", report.p_odd_star_norm);
            println!("Lebesgue    {:.6}", report.lebesgue_constant);
        }
    }
    io::write_outputs(output, &[("scheme.json", json)])
}

#[derive(Serialize)]
struct RecoverConfig {
    scheme: String,
    ell: u32,
    d: usize,
    m: u32,
    function: Option<String>,
    samples: Option<String>,
    eval: Option<String>,
    resolution: Option<usize>,
}

#[derive(Serialize)]
struct RecoverReport<'a> {
    config: RecoverConfig,
    grid_points: usize,
    /// `‖f - R_m f‖_2` for builtin targets.
    residual_l2: Option<f64>,
    coefficients: &'a HierCoeffs,
}

pub fn recover(args: &RecoverArgs) -> CliResult<()> {
    let scheme = io::load_scheme(&args.scheme)?;
    let (d, m) = (args.d, args.m);
    if d == 0 {
        return Err(Failure::new(Kind::Usage, "d must be at least 1"));
    }
    let grid = enumerate_grid(d, m, &scheme);
    let mut residual_l2 = None;
    let coeffs = if let Some(path) = &args.samples {
        let (values, skipped) = io::read_samples(path, d, m, scheme.ell())?;
        if skipped > 0 {
            eprintln!("warning: ignored {skipped} sample(s) off the level-{m} lattice");
        }
        recover_samples(&scheme, d, m, &values)?
    } else {
        let name = args.function.as_deref().expect("clap requires --function or --samples");
        let f = builtin_function(name)?;
        let coeffs = recover_fn(&scheme, d, m, f)?;
        if d <= MAX_GRID_DIM {
            residual_l2 = Some(residual_norm(f, &coeffs, 2.0, default_resolution(d, m))?.value);
        }
        coeffs
    };

    let points: Vec<Vec<f64>> = if let Some(path) = &args.eval {
        io::read_points(path, d)?
    } else if let Some(res) = args.resolution {
        uniform_grid(d, res).collect()
    } else {
        grid.points().map(|p| point_to_f64(p)).collect()
    };
    let values: Vec<f64> = points.iter().map(|x| coeffs.eval(x)).collect();
    let values_csv = io::points_csv(&points, &values, "value");

    let report = RecoverReport {
        config: RecoverConfig {
            scheme: scheme.name().into(),
            ell: scheme.ell(),
            d,
            m,
            function: args.function.clone(),
            samples: args.samples.as_ref().map(|p| p.display().to_string()),
            eval: args.eval.as_ref().map(|p| p.display().to_string()),
            resolution: args.resolution,
        },
        grid_points: grid.len(),
        residual_l2,
        coefficients: &coeffs,
    };
    let summary = match residual_l2 {
        Some(r) => format!("recovered from {} grid points, L2 residual {r:.6e}", grid.len()),
        None => format!("recovered from {} grid points", grid.len()),
    };
    if args.output.out.is_some() {
        println!("{summary}");
        return io::write_outputs(
            &args.output,
            &[("values.csv", values_csv), ("coeffs.json", io::to_json(&coeffs)), ("report.json", io::to_json(&report))],
        );
    }
    eprintln!("{summary}");
    match args.output.format {
        Format::Csv => print!("{values_csv}"),
        Format::Json => print!("{}", io::to_json(&report)),
    }
    Ok(())
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let scheme = io::load_scheme(&args.scheme)?;
    let mut cfg = BenchConfig::new(args.d, args.r, args.p, args.q, args.m_range.0, args.m_range.1);
    cfg.seed = args.seed;
    cfg.resolution = args.resolution;
    cfg.k_max = args.k_max;
    cfg.fixture = match args.fixture {
        FixtureArg::Auto => Fixture::Auto,
        FixtureArg::Random => Fixture::Random,
        FixtureArg::Coherent => Fixture::Coherent,
    };

    if args.selftest {
        let rep = run_selftest(&cfg)?;
        let ok = (rep.fit.rho - rep.planted_rho).abs() < 1e-9 && (rep.fit.beta - rep.planted_beta).abs() < 1e-9;
        match args.output.format {
            Format::Json => print!("{}", io::to_json(&rep)),
            Format::Csv => println!(
                "selftest planted rho {} beta {}, fitted rho {:.12} beta {:.12}: {}",
                rep.planted_rho,
                rep.planted_beta,
                rep.fit.rho,
                rep.fit.beta,
                if ok { "ok" } else { "MISMATCH" }
            ),
        }
        if !ok {
            return Err(Failure::new(Kind::Fit, "selftest did not recover the planted exponent"));
        }
        return Ok(());
    }

    let rep = run_benchmark(&scheme, &cfg)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    let summary = format!(
        "fit ({}): rho {:.4}, beta {:.4}, C {:.4e}, residual {:.4}; theory: rho {}, beta {}",
        rep.model, rep.fit.rho, rep.fit.beta, rep.fit.c, rep.fit.residual, rep.theoretical_rho, rep.theoretical_beta
    );
    if args.output.out.is_some() {
        println!("{summary}");
        return io::write_outputs(&args.output, &[("table.csv", rep.table_csv()), ("report.json", io::to_json(&rep))]);
    }
    match args.output.format {
        Format::Csv => {
            print!("{}", rep.table_csv());
            eprintln!("{summary}");
        }
        Format::Json => print!("{}", io::to_json(&rep)),
    }
    Ok(())
}

fn level_range(levels: &LevelArgs, default: (u32, u32)) -> (u32, u32) {
    match (levels.m, levels.m_range) {
        (Some(m), _) => (m, m),
        (None, Some(r)) => r,
        (None, None) => default,
    }
}

pub fn witness(args: &WitnessArgs) -> CliResult<()> {
    let scheme = io::load_scheme(&args.scheme)?;
    let (m_lo, m_hi) = level_range(&args.levels, (2, 6));
    let cfg = WitnessConfig {
        kind: match args.kind {
            WitnessArg::G1 => WitnessKind::G1,
            WitnessArg::G2 => WitnessKind::G2,
        },
        d: args.d,
        m_lo,
        m_hi,
        r: args.r,
        p: args.p,
        q: args.q,
        oversample: args.oversample,
    };
    let rep = run_witness(&scheme, &cfg)?;
    let mut table = String::from("m,grid_points,grid_max,norm,step_ratio\n");
    for row in &rep.rows {
        let step = row.step_ratio.map_or(String::new(), |s| format!("{s:.6}"));
        table += &format!("{},{},{:e},{:e},{}\n", row.m, row.grid_points, row.grid_max, row.norm, step);
    }
    let mut summary = format!(
        "level offset {}, expected step ratio {:.6}",
        rep.level_offset, rep.expected_step_ratio
    );
    if let Some(fit) = &rep.fit {
        summary += &format!("; norm fit rho {:.4}, beta {:.4}, residual {:.4}", fit.rho, fit.beta, fit.residual);
    }
    if args.output.out.is_some() {
        println!("{summary}");
        return io::write_outputs(&args.output, &[("witness.csv", table), ("report.json", io::to_json(&rep))]);
    }
    match args.output.format {
        Format::Csv => {
            print!("{table}");
            eprintln!("{summary}");
        }
        Format::Json => print!("{}", io::to_json(&rep)),
    }
    Ok(())
}

pub fn grid(args: &GridArgs) -> CliResult<()> {
    let scheme = io::load_scheme(&args.scheme)?;
    if args.d == 0 {
        return Err(Failure::new(Kind::Usage, "d must be at least 1"));
    }
    let (text, name) = if let Some((lo, hi)) = args.levels.m_range {
        let table = cardinality_table(&scheme, args.d, lo, hi);
        match args.output.format {
            Format::Csv => {
                let mut csv = String::from("m,n_points,ratio\n");
                for row in &table {
                    csv += &format!("{},{},{:.6}\n", row.m, row.n_points, row.ratio);
                }
                (csv, "cardinality.csv")
            }
            Format::Json => (io::to_json(&table), "cardinality.json"),
        }
    } else {
        let m = args.levels.m.unwrap_or(3);
        let grid = enumerate_grid(args.d, m, &scheme);
        eprintln!("{} points, d = {}, m = {m}", grid.len(), args.d);
        match args.output.format {
            Format::Csv => (grid.to_csv(), "grid.csv"),
            Format::Json => (io::to_json(&grid), "grid.json"),
        }
    };
    if args.output.out.is_some() {
        return io::write_outputs(&args.output, &[(name, text)]);
    }
    print!("{text}");
    Ok(())
}
