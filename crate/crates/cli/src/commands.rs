//! Implementations of the five subcommands. Each command validates its
//! inputs, runs the numerics, renders every output file in memory, and only
//! then commits them to disk.

use std::path::Path;

use locsym_core::chain::{detect_reflection_domains, DomainSpec, DETECT_TOL};
use locsym_core::symmetry::{
    count_localized, eigenstate_map, splitting_fit, sweep_center_coupling,
};
use locsym_core::tridiag::eigh;
use locsym_core::weak_coupling::{
    classify_sites, component_series_degenerate, component_series_nondegenerate,
    eigvalue_series_degenerate_pair, eigvalue_series_nondegenerate, ComponentSeries,
    EigenvalueSeries,
};
use locsym_core::{build, Chain, ChainConfig, CouplingSpec, Error, LSDomain};

use crate::manifest::RunManifest;
use crate::output::{commit, fmt17, OutFile};

/// Exit-code conventions: 2 config, 3 numeric, 4 tracking, 5 degeneracy.
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl CmdError {
    fn config(message: impl ToString) -> Self {
        CmdError {
            code: 2,
            message: message.to_string(),
        }
    }
}

fn core_exit_code(err: &Error) -> i32 {
    match err {
        Error::TrackingAmbiguity { .. } => 4,
        Error::UnsupportedDegeneracy { .. }
        | Error::DegenerateSite { .. }
        | Error::NotAdjacentDegenerate { .. }
        | Error::DegenerateEigenvalue { .. } => 5,
        Error::DegenerateSpectrum { .. } => 3,
        _ => 2,
    }
}

impl From<Error> for CmdError {
    fn from(err: Error) -> Self {
        CmdError {
            code: core_exit_code(&err),
            message: err.to_string(),
        }
    }
}

fn load_chain(config_path: &Path) -> Result<(ChainConfig, Chain), CmdError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CmdError::config(format!("cannot read {}: {e}", config_path.display())))?;
    let config = ChainConfig::from_json(&text)
        .map_err(|e| CmdError::config(format!("{}: {e}", config_path.display())))?;
    let chain = build(&config)?;
    Ok((config, chain))
}

fn write_files(out_dir: &Path, files: &[OutFile]) -> Result<(), CmdError> {
    commit(out_dir, files).map_err(|e| CmdError {
        code: 3,
        message: format!("cannot write outputs to {}: {e}", out_dir.display()),
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// `start:stop:count`, both endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CmdError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CmdError::config(format!(
            "grid must be start:stop:count, got {spec}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| CmdError::config(format!("bad grid start {}", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| CmdError::config(format!("bad grid stop {}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CmdError::config(format!("bad grid count {}", parts[2])))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(CmdError::config("grid endpoints must be finite"));
    }
    if count == 0 {
        return Err(CmdError::config("grid count must be at least 1"));
    }
    if count == 1 {
        if start != stop {
            return Err(CmdError::config("a single-point grid needs start == stop"));
        }
        return Ok(vec![start]);
    }
    if stop <= start {
        return Err(CmdError::config("grid stop must exceed start"));
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

pub fn parse_domain_flag(spec: &str) -> Result<DomainSpec, CmdError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(CmdError::config(format!("domain must be S,E, got {spec}")));
    }
    let start = parts[0]
        .trim()
        .parse()
        .map_err(|_| CmdError::config(format!("bad domain start {}", parts[0])))?;
    let end = parts[1]
        .trim()
        .parse()
        .map_err(|_| CmdError::config(format!("bad domain end {}", parts[1])))?;
    Ok(DomainSpec { start, end })
}

fn resolve_domain(
    chain: &Chain,
    config: &ChainConfig,
    flag: Option<&DomainSpec>,
) -> Result<LSDomain, CmdError> {
    if let Some(d) = flag {
        return Ok(LSDomain::reflection(chain, d.start, d.end, DETECT_TOL)?);
    }
    if let Some(declared) = &config.domains {
        if declared.len() == 1 {
            let d = declared[0];
            return Ok(LSDomain::reflection(chain, d.start, d.end, DETECT_TOL)?);
        }
    }
    let found = detect_reflection_domains(chain, 2, DETECT_TOL, true)?;
    match found.len() {
        0 => Err(CmdError::config(
            "no reflection domain found; pass --domain S,E",
        )),
        1 => Ok(found[0]),
        _ => {
            let list: Vec<String> = found
                .iter()
                .map(|d| format!("[{},{}]", d.start, d.end))
                .collect();
            Err(CmdError::config(format!(
                "ambiguous domain; pass --domain S,E to choose one of {}",
                list.join(" ")
            )))
        }
    }
}

fn spectrum_rows(eigenvalues: &[f64]) -> Vec<String> {
    eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{i},{}", fmt17(*l)))
        .collect()
}

fn site_header(n: usize) -> String {
    (0..n)
        .map(|mu| format!("site_{mu}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_spectrum(config_path: &Path, out_dir: &Path) -> Result<(), CmdError> {
    let (_, chain) = load_chain(config_path)?;
    let manifest = RunManifest::new("spectrum", &path_str(config_path), &path_str(out_dir));
    let line = manifest.comment_line();
    let sp = eigh(&chain);

    let spectrum = OutFile::csv(
        "spectrum.csv",
        &line,
        "index,eigenvalue",
        &spectrum_rows(sp.eigenvalues()),
    );
    let vec_rows: Vec<String> = (0..sp.len())
        .map(|i| {
            sp.vector(i)
                .iter()
                .map(|x| fmt17(*x))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let eigvecs = OutFile::csv("eigvecs.csv", &line, &site_header(chain.len()), &vec_rows);
    write_files(out_dir, &[spectrum, eigvecs])
}

pub fn cmd_map(config_path: &Path, out_dir: &Path) -> Result<(), CmdError> {
    let (_, chain) = load_chain(config_path)?;
    let manifest = RunManifest::new("map", &path_str(config_path), &path_str(out_dir));
    let line = manifest.comment_line();
    let sp = eigh(&chain);
    let map = eigenstate_map(&sp);

    let rows: Vec<String> = map
        .rows()
        .iter()
        .map(|row| row.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(","))
        .collect();
    let csv = OutFile::csv("map.csv", &line, &site_header(chain.len()), &rows);

    // Plain PGM, one pixel row per state, highest energy on top.
    let peak = map
        .rows()
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let n = map.len();
    let mut pgm = String::new();
    pgm.push_str("P2\n");
    pgm.push_str(&line);
    pgm.push('\n');
    pgm.push_str(&format!("{n} {n}\n255\n"));
    for row in map.rows().iter().rev() {
        let pixels: Vec<String> = row
            .iter()
            .map(|x| format!("{}", (255.0 * x / peak).round() as u32))
            .collect();
        pgm.push_str(&pixels.join(" "));
        pgm.push('\n');
    }
    let pgm = OutFile {
        name: "map.pgm".to_string(),
        content: pgm,
    };
    write_files(out_dir, &[csv, pgm])
}

pub fn cmd_sweep(
    config_path: &Path,
    out_dir: &Path,
    domain_flag: Option<&str>,
    grid_spec: &str,
) -> Result<(), CmdError> {
    let (config, chain) = load_chain(config_path)?;
    let flag = domain_flag.map(parse_domain_flag).transpose()?;
    let domain = resolve_domain(&chain, &config, flag.as_ref())?;
    let grid = parse_grid(grid_spec)?;
    let mut manifest = RunManifest::new("sweep", &path_str(config_path), &path_str(out_dir))
        .with_override("domain", format!("{},{}", domain.start, domain.end))
        .with_override("grid", grid_spec);
    if let Some(d) = &flag {
        manifest = manifest.with_override("domain_flag", format!("{},{}", d.start, d.end));
    }
    let line = manifest.comment_line();

    let sweep = sweep_center_coupling(&chain, &domain, &grid)?;

    let n = chain.len();
    let mut header = String::from("eps_c");
    for i in 1..=n {
        header.push_str(&format!(",lambda_{i}"));
    }
    let rows: Vec<String> = sweep
        .grid
        .iter()
        .zip(&sweep.spectra)
        .map(|(ec, levels)| {
            let mut row = fmt17(*ec);
            for l in levels {
                row.push(',');
                row.push_str(&fmt17(*l));
            }
            row
        })
        .collect();
    let sweep_csv = OutFile::csv("sweep.csv", &line, &header, &rows);

    let mut fit_rows = Vec::new();
    if sweep.grid.len() >= 2 {
        for pair in 0..sweep.pair_tracks.len() {
            let fit = splitting_fit(&sweep, pair)?;
            fit_rows.push(format!(
                "{pair},{},{},{},{}",
                fmt17(fit.origin_slope),
                fmt17(fit.fit_slope),
                fmt17(fit.r_squared),
                fmt17(fit.residual_gap)
            ));
        }
    }
    let fits_csv = OutFile::csv(
        "fits.csv",
        &line,
        "pair,origin_slope,fit_slope,r_squared,residual_gap",
        &fit_rows,
    );
    write_files(out_dir, &[sweep_csv, fits_csv])
}

enum StateSeries {
    Nondegenerate(EigenvalueSeries, Option<ComponentSeries>),
    PairBranch(EigenvalueSeries, ComponentSeries),
}

impl StateSeries {
    fn eigen(&self) -> &EigenvalueSeries {
        match self {
            StateSeries::Nondegenerate(ev, _) => ev,
            StateSeries::PairBranch(ev, _) => ev,
        }
    }

    fn class(&self) -> &'static str {
        match self {
            StateSeries::Nondegenerate(..) => "nondegenerate",
            StateSeries::PairBranch(..) => "pair",
        }
    }

    fn components(&self) -> Option<&ComponentSeries> {
        match self {
            StateSeries::Nondegenerate(_, c) => c.as_ref(),
            StateSeries::PairBranch(_, c) => Some(c),
        }
    }
}

pub fn cmd_perturb(
    config_path: &Path,
    out_dir: &Path,
    eps_flag: Option<f64>,
) -> Result<(), CmdError> {
    let (config, chain) = load_chain(config_path)?;
    let onsite = chain.onsite();
    let eps = match (eps_flag, &config.coupling) {
        (Some(e), _) => e,
        (None, CouplingSpec::Uniform(e)) => *e,
        (None, _) => {
            return Err(CmdError::config(
                "config coupling is not a single value; pass --eps X for the cross-check",
            ))
        }
    };
    let manifest = RunManifest::new("perturb", &path_str(config_path), &path_str(out_dir))
        .with_override("eps", fmt17(eps));
    let line = manifest.comment_line();

    let classes = classify_sites(onsite)?;
    let mut states: Vec<StateSeries> = Vec::new();
    for &site in &classes.nondegenerate {
        let ev = eigvalue_series_nondegenerate(onsite, site)?;
        // Component series needs the on-site value to be globally unique;
        // a distant repeat leaves the eigenvalue series valid but the
        // component expansion undefined.
        let comp = component_series_nondegenerate(onsite, site).ok();
        states.push(StateSeries::Nondegenerate(ev, comp));
    }
    for &pair in &classes.pairs {
        let [plus, minus] = eigvalue_series_degenerate_pair(onsite, pair)?;
        let [cp, cm] = component_series_degenerate(onsite, pair)?;
        states.push(StateSeries::PairBranch(plus, cp));
        states.push(StateSeries::PairBranch(minus, cm));
    }
    states.sort_by_key(|s| (s.eigen().state, s.eigen().lambda1 < 0.0));

    let series_rows: Vec<String> = states
        .iter()
        .map(|s| {
            let ev = s.eigen();
            format!(
                "{},{},{},{},{}",
                ev.state,
                s.class(),
                fmt17(ev.lambda0),
                fmt17(ev.lambda1),
                fmt17(ev.lambda2)
            )
        })
        .collect();
    let series_csv = OutFile::csv(
        "series.csv",
        &line,
        "state,class,lambda0,lambda1,lambda2",
        &series_rows,
    );

    let mut comp_rows = Vec::new();
    for s in &states {
        let Some(c) = s.components() else { continue };
        let tag = if s.eigen().lambda1 < 0.0 { "-" } else { "+" };
        let state_label = if s.class() == "pair" {
            format!("{}{tag}", s.eigen().state)
        } else {
            s.eigen().state.to_string()
        };
        for mu in 0..onsite.len() {
            comp_rows.push(format!(
                "{state_label},{mu},{},{},{},{}",
                fmt17(c.order0[mu]),
                fmt17(c.order1[mu]),
                fmt17(c.order2[mu]),
                u8::from(c.valid[mu])
            ));
        }
    }
    let comps_csv = OutFile::csv(
        "components_series.csv",
        &line,
        "state,site,c0,c1,c2,valid",
        &comp_rows,
    );

    // Cross-check against exact diagonalization at the requested coupling.
    let exact_chain = Chain::uniform(onsite.to_vec(), eps)?;
    let exact = eigh(&exact_chain);
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| {
        states[a]
            .eigen()
            .eval(eps)
            .total_cmp(&states[b].eigen().eval(eps))
    });
    let mut check_rows = Vec::new();
    for (rank, &sid) in order.iter().enumerate() {
        let s = &states[sid];
        let predicted = s.eigen().eval(eps);
        let exact_l = exact.eigenvalues()[rank];
        check_rows.push(format!(
            "eigenvalue,{},,{},{},{}",
            s.eigen().state,
            fmt17(predicted),
            fmt17(exact_l),
            fmt17((predicted - exact_l).abs())
        ));
        if let Some(c) = s.components() {
            let approx = c.eval(eps);
            for (mu, value) in approx.iter().enumerate() {
                if !c.valid[mu] {
                    continue;
                }
                let exact_s2 = exact.component(mu, rank).powi(2);
                check_rows.push(format!(
                    "component,{},{mu},{},{},{}",
                    s.eigen().state,
                    fmt17(*value),
                    fmt17(exact_s2),
                    fmt17((value - exact_s2).abs())
                ));
            }
        }
    }
    let check_csv = OutFile::csv(
        "check.csv",
        &line,
        "kind,state,site,series,exact,abs_error",
        &check_rows,
    );
    write_files(out_dir, &[series_csv, comps_csv, check_csv])
}

pub fn cmd_detect(
    config_path: &Path,
    out_dir: &Path,
    min_size: usize,
    tol: f64,
    all: bool,
    theta: f64,
) -> Result<(), CmdError> {
    let (_, chain) = load_chain(config_path)?;
    let manifest = RunManifest::new("detect", &path_str(config_path), &path_str(out_dir))
        .with_override("min_size", min_size)
        .with_override("tol", fmt17(tol))
        .with_override("all", all)
        .with_override("theta", fmt17(theta));
    let line = manifest.comment_line();

    let domains = detect_reflection_domains(&chain, min_size, tol, !all)?;
    let rows: Vec<String> = domains
        .iter()
        .map(|d| format!("{},{},{}", d.start, d.end, d.center_bond))
        .collect();
    let domains_csv = OutFile::csv("domains.csv", &line, "start,end,center_bond", &rows);

    let sp = eigh(&chain);
    let report = count_localized(&sp, &domains, theta)?;
    let mut header = String::from("state,assigned");
    for d in 0..domains.len() {
        header.push_str(&format!(",w_{d}"));
    }
    let loc_rows: Vec<String> = (0..sp.len())
        .map(|i| {
            let assigned = report.assignment[i]
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".to_string());
            let mut row = format!("{i},{assigned}");
            for w in &report.weights[i] {
                row.push(',');
                row.push_str(&fmt17(*w));
            }
            row
        })
        .collect();
    let loc_csv = OutFile::csv("localization.csv", &line, &header, &loc_rows);

    write_files(out_dir, &[domains_csv, loc_csv])?;

    println!(
        "chain: {} sites, {} bonds, contrast {}",
        chain.len(),
        chain.len() - 1,
        if chain.contrast().is_finite() {
            format!("{:.6}", chain.contrast())
        } else {
            "inf".to_string()
        }
    );
    if domains.is_empty() {
        println!("no reflection domains of size >= {min_size}");
    }
    for d in &domains {
        println!(
            "domain [{}, {}]: {} sites, center bond {}",
            d.start,
            d.end,
            d.size(),
            d.center_bond
        );
    }
    println!(
        "localized states at theta {:.3}: {} of {}",
        theta,
        report.localized_count(),
        sp.len()
    );
    Ok(())
}
