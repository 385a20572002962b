//! Subcommand bodies. Each one completes the merged settings with its
//! defaults (so the echo is the full resolved record), builds the library
//! inputs, runs, and writes one output.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use serde_json::json;

use collapse_radiance::csl::CslParams;
use collapse_radiance::dp::DpParams;
use collapse_radiance::inference::{
    iterate_corr_length, synth_counts, Detector, FitModel, FitResult, IterationSettings, ProfileChi2, SyntheticSpectrum,
};
use collapse_radiance::io::{self, fmt_f64, CommentedCsv, Metadata};
use collapse_radiance::spectra::{
    alpha_band, compute_spectrum, convergence_energy, normalize_shape, ratio, z_survey, Family,
};
use collapse_radiance::units::VALIDITY_FLOOR_KEV;
use collapse_radiance::{builtin_atom, parse_atom, Atom, Energy, EnergyGrid, ModelParams, PairGeometry, RateModel};

use crate::config::{Format, GridSpacing, Settings};
use crate::CliError;

type Res<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Library validation failures while resolving inputs are usage errors.
fn invalid<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn execute(command: &str, mut s: Settings, out: Option<&Path>) -> Res<()> {
    match command {
        "spectrum" => spectrum(&mut s, out),
        "compare" => compare(&mut s, out),
        "band" => band(&mut s, out),
        "zsurvey" => zsurvey(&mut s, out),
        "synth" => synth(&mut s, out),
        "fit" => fit(&mut s, out),
        other => Err(usage(format!("unknown command {other}"))),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Res<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn parse_model(text: &str) -> Res<RateModel> {
    RateModel::from_str(text).map_err(invalid)
}

fn require_model(s: &mut Settings) -> Res<RateModel> {
    let text = s.model.as_deref().ok_or_else(|| usage("--model is required"))?;
    let model = parse_model(text)?;
    s.model = Some(model.as_str().to_string());
    Ok(model)
}

/// Builtin symbol, or a path to an atom JSON document.
fn load_atom(name: &str) -> Res<Atom> {
    let path = Path::new(name);
    if path.is_file() || name.ends_with(".json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read atom file {name}"))?;
        return Ok(parse_atom(&text).with_context(|| format!("invalid atom file {name}"))?);
    }
    Ok(builtin_atom(name)?)
}

fn require_atom(s: &Settings) -> Res<Atom> {
    load_atom(s.atom.as_deref().ok_or_else(|| usage("--atom is required"))?)
}

fn geometry(s: &mut Settings) -> Res<PairGeometry> {
    let alpha = *s.alpha.get_or_insert(PairGeometry::DEFAULT_ALPHA);
    let beta = *s.beta.get_or_insert(PairGeometry::DEFAULT_BETA);
    PairGeometry::new(alpha, beta).map_err(invalid)
}

fn csl_params(s: &mut Settings) -> Res<ModelParams> {
    let rc = s.rc.ok_or_else(|| usage("--rc is required for CSL models"))?;
    let lambda = *s.lambda.get_or_insert(1.0);
    let p = match s.ecut {
        Some(ec) => CslParams::colored(lambda, rc, ec),
        None => CslParams::markovian(lambda, rc),
    };
    Ok(p.map_err(invalid)?.into())
}

fn dp_params(s: &mut Settings) -> Res<ModelParams> {
    let r0 = s.r0.ok_or_else(|| usage("--r0 is required for DP models"))?;
    let p = match s.ecut {
        Some(ec) => DpParams::colored(r0, ec),
        None => DpParams::markovian(r0),
    };
    Ok(p.map_err(invalid)?.into())
}

/// Parameters for the families in use; values for unused families are
/// dropped from the echo.
fn params_for(s: &mut Settings, families: &[Family]) -> Res<Vec<ModelParams>> {
    let uses = |f| families.contains(&f);
    if !uses(Family::Csl) {
        s.rc = None;
        s.lambda = None;
    }
    if !uses(Family::Dp) {
        s.r0 = None;
    }
    families
        .iter()
        .map(|f| match f {
            Family::Csl => csl_params(s),
            Family::Dp => dp_params(s),
        })
        .collect()
}

fn grid(s: &mut Settings, defaults: (f64, f64, usize, GridSpacing)) -> Res<EnergyGrid> {
    let emin = *s.emin.get_or_insert(defaults.0);
    let emax = *s.emax.get_or_insert(defaults.1);
    let points = *s.points.get_or_insert(defaults.2);
    let spacing = *s.spacing.get_or_insert(defaults.3);
    let grid = if points == 1 && emin == emax {
        EnergyGrid::from_points(vec![emin])
    } else {
        match spacing {
            GridSpacing::Linear => EnergyGrid::linear(emin, emax, points),
            GridSpacing::Log => EnergyGrid::log(emin, emax, points),
        }
    };
    grid.map_err(invalid)
}

const SPECTRUM_GRID: (f64, f64, usize, GridSpacing) =
    (EnergyGrid::DEFAULT_MIN_KEV, EnergyGrid::DEFAULT_MAX_KEV, EnergyGrid::DEFAULT_POINTS, GridSpacing::Log);
const SYNTH_GRID: (f64, f64, usize, GridSpacing) = (2.5, 99.5, 98, GridSpacing::Linear);

fn warn_sub_kev(energies: &[f64]) {
    let n = energies.iter().filter(|e| **e < VALIDITY_FLOOR_KEV).count();
    if n > 0 {
        eprintln!(
            "warning: {n} energy point(s) below {VALIDITY_FLOOR_KEV} keV, where the semiclassical rates are not valid"
        );
    }
}

fn format(s: &mut Settings, default: Format) -> Format {
    *s.format.get_or_insert(default)
}

fn metadata(s: &Settings) -> Metadata {
    Metadata::new(Some(s.echo()))
}

fn to_json(value: &serde_json::Value) -> Res<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn header(meta: &Metadata, kind: &str) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    m.insert("format_version".into(), json!(meta.format_version));
    m.insert("tool_version".into(), json!(meta.tool_version));
    m.insert("config".into(), meta.config.clone().unwrap_or_default());
    m.insert("kind".into(), json!(kind));
    m
}

fn spectrum(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let model = require_model(s)?;
    let atom = require_atom(s)?;
    let params = params_for(s, &[model.family()])?.remove(0);
    let geom = geometry(s)?;
    let grid = grid(s, SPECTRUM_GRID)?;
    let fmt = format(s, Format::Csv);
    warn_sub_kev(grid.points());
    let spectrum = compute_spectrum(model, &atom, &params, &geom, &grid)?;
    let meta = metadata(s);
    let bytes = match fmt {
        Format::Csv => io::write_spectrum_csv(Vec::new(), &spectrum, &meta)?,
        Format::Json => {
            let mut text = io::spectrum_to_json(&spectrum, &meta)?;
            text.push('\n');
            text.into_bytes()
        }
    };
    emit(out, &bytes)
}

fn compare(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let model = require_model(s)?;
    let reference = match s.reference.as_deref() {
        Some(text) => parse_model(text)?,
        None => model.simple_counterpart(),
    };
    s.reference = Some(reference.as_str().to_string());
    let atom = require_atom(s)?;
    let mut families = vec![model.family()];
    if reference.family() != model.family() {
        families.push(reference.family());
    }
    let params = params_for(s, &families)?;
    let pick = |m: RateModel| params[families.iter().position(|f| *f == m.family()).expect("family resolved")];
    let geom = geometry(s)?;
    let grid = grid(s, SPECTRUM_GRID)?;
    let rel_tol = *s.rel_tol.get_or_insert(0.05);
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(usage(format!("--rel-tol must lie in (0, 1), got {rel_tol}")));
    }
    let fmt = format(s, Format::Csv);
    warn_sub_kev(grid.points());

    let a = normalize_shape(&compute_spectrum(model, &atom, &pick(model), &geom, &grid)?)?;
    let b = normalize_shape(&compute_spectrum(reference, &atom, &pick(reference), &geom, &grid)?)?;
    let r = ratio(&a, &b)?;
    let e_star = convergence_energy(&a, &b, rel_tol)?;
    let meta = metadata(s);
    let bytes = match fmt {
        Format::Csv => {
            let extra = [
                ("model_tag", a.model_tag()),
                ("reference_tag", b.model_tag()),
                ("atom", atom.symbol().to_string()),
                ("rel_tol", fmt_f64(rel_tol)),
                ("convergence_energy_keV", e_star.map_or("none".into(), fmt_f64)),
            ];
            let mut csv = CommentedCsv::new(Vec::new(), "collapse-radiance comparison", &meta, &extra)?;
            csv.row(&["energy_keV", "model_shape", "reference_shape", "ratio"])?;
            for i in 0..grid.len() {
                csv.row(&[fmt_f64(grid.points()[i]), fmt_f64(a.values[i]), fmt_f64(b.values[i]), fmt_f64(r[i])])?;
            }
            csv.finish()?
        }
        Format::Json => {
            let mut doc = header(&meta, "comparison");
            doc.insert("model_tag".into(), json!(a.model_tag()));
            doc.insert("reference_tag".into(), json!(b.model_tag()));
            doc.insert("atom".into(), json!(atom.symbol()));
            doc.insert("rel_tol".into(), json!(rel_tol));
            doc.insert("convergence_energy_keV".into(), json!(e_star));
            doc.insert("energies_keV".into(), json!(grid.points()));
            doc.insert("model_shape".into(), json!(a.values));
            doc.insert("reference_shape".into(), json!(b.values));
            doc.insert("ratio".into(), json!(r));
            to_json(&doc.into())?
        }
    };
    emit(out, &bytes)
}

fn band(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let model = require_model(s)?;
    let atom = require_atom(s)?;
    let params = params_for(s, &[model.family()])?.remove(0);
    let lo = *s.alpha_min.get_or_insert(PairGeometry::ALPHA_BAND.0);
    let hi = *s.alpha_max.get_or_insert(PairGeometry::ALPHA_BAND.1);
    let samples = *s.samples.get_or_insert(11);
    let beta = *s.beta.get_or_insert(PairGeometry::DEFAULT_BETA);
    let geom = PairGeometry::new(0.5 * (lo + hi), beta).map_err(invalid)?;
    let grid = grid(s, SPECTRUM_GRID)?;
    let fmt = format(s, Format::Csv);
    warn_sub_kev(grid.points());
    let band = alpha_band(model, &atom, &params, &geom, &grid, (lo, hi), samples).map_err(invalid)?;
    let meta = metadata(s);
    let bytes = match fmt {
        Format::Csv => {
            let alphas: Vec<String> = band.alphas.iter().map(|a| fmt_f64(*a)).collect();
            let extra = [
                ("model_tag", band.mid.model_tag()),
                ("atom", atom.symbol().to_string()),
                ("alphas", alphas.join(" ")),
            ];
            let mut csv = CommentedCsv::new(Vec::new(), "collapse-radiance alpha band", &meta, &extra)?;
            csv.row(&["energy_keV", "lower", "mid", "upper"])?;
            for i in 0..grid.len() {
                csv.row(&[
                    fmt_f64(grid.points()[i]),
                    fmt_f64(band.lower.values[i]),
                    fmt_f64(band.mid.values[i]),
                    fmt_f64(band.upper.values[i]),
                ])?;
            }
            csv.finish()?
        }
        Format::Json => {
            let mut doc = header(&meta, "alpha_band");
            doc.insert("model_tag".into(), json!(band.mid.model_tag()));
            doc.insert("atom".into(), json!(atom.symbol()));
            doc.insert("alphas".into(), json!(band.alphas));
            doc.insert("energies_keV".into(), json!(grid.points()));
            doc.insert("lower".into(), json!(band.lower.values));
            doc.insert("mid".into(), json!(band.mid.values));
            doc.insert("upper".into(), json!(band.upper.values));
            to_json(&doc.into())?
        }
    };
    emit(out, &bytes)
}

fn zsurvey(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let model = require_model(s)?;
    let specs = s.atoms.get_or_insert_with(|| vec!["Ge".into(), "Xe".into()]).clone();
    if specs.is_empty() {
        return Err(usage("--atoms needs at least one atom"));
    }
    let atoms = specs.iter().map(|a| load_atom(a)).collect::<Res<Vec<_>>>()?;
    let params = params_for(s, &[model.family()])?.remove(0);
    let geom = geometry(s)?;
    let e = s.energy.ok_or_else(|| usage("--energy is required"))?;
    let energy = Energy::from_kev(e).map_err(invalid)?;
    let fmt = format(s, Format::Csv);
    warn_sub_kev(&[e]);
    let rows = z_survey(&atoms, energy, model, &params, &geom)?;
    let meta = metadata(s);
    let tag = format!("{}:{}", model.as_str(), noise_name(&params));
    let bytes = match fmt {
        Format::Csv => {
            let extra = [("model_tag", tag), ("energy_keV", fmt_f64(e))];
            let mut csv = CommentedCsv::new(Vec::new(), "collapse-radiance z-survey", &meta, &extra)?;
            csv.row(&["symbol", "Z", "rate", "cancellation_factor"])?;
            for r in &rows {
                csv.row(&[r.symbol.clone(), r.n_protons.to_string(), fmt_f64(r.rate), fmt_f64(r.cancellation_factor)])?;
            }
            csv.finish()?
        }
        Format::Json => {
            let mut doc = header(&meta, "z_survey");
            doc.insert("model_tag".into(), json!(tag));
            doc.insert("energy_keV".into(), json!(e));
            doc.insert("rows".into(), json!(rows));
            to_json(&doc.into())?
        }
    };
    emit(out, &bytes)
}

fn noise_name(params: &ModelParams) -> &'static str {
    match params.e_cutoff() {
        Some(_) => "colored",
        None => "markovian",
    }
}

fn synth(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let model = require_model(s)?;
    let atom = require_atom(s)?;
    let params = params_for(s, &[model.family()])?.remove(0);
    let geom = geometry(s)?;
    let centers = grid(s, SYNTH_GRID)?;
    let exposure = s.exposure.ok_or_else(|| usage("--exposure is required"))?;
    let width = *s.bin_width.get_or_insert(1.0);
    let efficiency = *s.efficiency.get_or_insert(1.0);
    let background = *s.background.get_or_insert(0.0);
    let seed = *s.seed.get_or_insert(42);
    let fmt = format(s, Format::Csv);
    let detector = Detector::uniform(centers, width, exposure, efficiency, background);
    detector.validate().map_err(invalid)?;
    warn_sub_kev(detector.centers.points());
    let data = synth_counts(model, &atom, &params, &geom, &detector, seed)?;
    if data.clamped_flag {
        eprintln!("warning: negative model rates were clamped to zero before sampling");
    }
    let meta = metadata(s);
    match fmt {
        Format::Csv => {
            let path =
                out.ok_or_else(|| usage("synth with --format csv needs --out (a JSON sidecar is written next to it)"))?;
            let sidecar = io::sidecar_path(path);
            if sidecar == path {
                return Err(usage("the CSV output must not have a .json extension"));
            }
            let csv = io::write_synthetic_csv(Vec::new(), &data, &meta)?;
            let mut side = io::synthetic_sidecar_json(&data, &meta)?;
            side.push('\n');
            emit(Some(path), &csv)?;
            emit(Some(&sidecar), side.as_bytes())
        }
        Format::Json => {
            let mut text = io::synthetic_to_json(&data, &meta)?;
            text.push('\n');
            emit(out, text.as_bytes())
        }
    }
}

fn read_data(path: &Path) -> Res<SyntheticSpectrum> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        return Ok(io::synthetic_from_json(&text).with_context(|| format!("invalid data file {}", path.display()))?);
    }
    let sidecar = io::sidecar_path(path);
    let side =
        std::fs::read_to_string(&sidecar).with_context(|| format!("cannot read sidecar {}", sidecar.display()))?;
    Ok(io::read_synthetic(&text, &side).with_context(|| format!("invalid data file {}", path.display()))?)
}

fn fit(s: &mut Settings, out: Option<&Path>) -> Res<()> {
    let path = s.data.clone().ok_or_else(|| usage("--data is required"))?;
    let data = read_data(&path)?;
    let model = match s.model.as_deref() {
        Some(text) => parse_model(text)?,
        None => data.truth.model,
    };
    s.model = Some(model.as_str().to_string());
    let atom = match s.atom.as_deref() {
        Some(name) => load_atom(name)?,
        None => Atom::try_from(data.truth.atom.clone()).context("atom recorded in the data")?,
    };
    let prior = match (s.prior, model.family()) {
        (Some(p), _) => p,
        (None, Family::Csl) => s.rc.ok_or_else(|| usage("--prior (or --rc) is required"))?,
        (None, Family::Dp) => s.r0.ok_or_else(|| usage("--prior (or --r0) is required"))?,
    };
    s.prior = Some(prior);
    s.rc = None;
    s.r0 = None;
    let template: ModelParams = match (model.family(), s.ecut) {
        (Family::Csl, None) => CslParams::markovian(1.0, prior).map(Into::into),
        (Family::Csl, Some(ec)) => CslParams::colored(1.0, prior, ec).map(Into::into),
        (Family::Dp, None) => DpParams::markovian(prior).map(Into::into),
        (Family::Dp, Some(ec)) => DpParams::colored(prior, ec).map(Into::into),
    }
    .map_err(invalid)?;
    let geom = geometry(s)?;
    let settings = IterationSettings {
        prior,
        rel_tol: *s.rel_tol.get_or_insert(IterationSettings::DEFAULT_REL_TOL),
        max_iter: *s.max_iter.get_or_insert(IterationSettings::DEFAULT_MAX_ITER),
    };
    let fmt = format(s, Format::Json);
    let fit_model = FitModel::new(model, template).map_err(invalid)?;
    let result = iterate_corr_length(&data, &fit_model, &atom, &geom, settings, &ProfileChi2::default())?;
    if !result.converged {
        eprintln!("warning: no convergence within {} iterations", settings.max_iter);
    }
    let meta = metadata(s);
    let bytes = match fmt {
        Format::Json => {
            let mut doc = header(&meta, "fit");
            doc.insert("result".into(), serde_json::to_value(&result).context("serializing fit")?);
            to_json(&doc.into())?
        }
        Format::Csv => fit_csv(&result, &meta)?,
    };
    emit(out, &bytes)
}

fn fit_csv(r: &FitResult, meta: &Metadata) -> Res<Vec<u8>> {
    let extra = [
        ("model", r.model.as_str().to_string()),
        ("update_rule", r.update_rule.clone()),
        ("amplitude", fmt_f64(r.amplitude)),
        ("amplitude_sigma", fmt_f64(r.amplitude_sigma)),
        ("amplitude_sigma_fixed_length", fmt_f64(r.amplitude_sigma_fixed_length)),
        ("corr_length_m", fmt_f64(r.corr_length)),
        ("corr_length_sigma_m", fmt_f64(r.corr_length_sigma)),
        ("converged", r.converged.to_string()),
        ("chi2", fmt_f64(r.chi2)),
        ("ndof", r.ndof.to_string()),
    ];
    let mut csv = CommentedCsv::new(Vec::new(), "collapse-radiance fit", meta, &extra)?;
    csv.row(&["iteration", "prior_m", "posterior_m", "amplitude", "chi2", "rel_change"])?;
    for (i, it) in r.iterations.iter().enumerate() {
        csv.row(&[
            (i + 1).to_string(),
            fmt_f64(it.prior),
            fmt_f64(it.posterior),
            fmt_f64(it.amplitude),
            fmt_f64(it.chi2),
            fmt_f64(it.rel_change),
        ])?;
    }
    Ok(csv.finish()?)
}
