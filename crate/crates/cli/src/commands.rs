//! One function per subcommand. Each reads its inputs through a [`Session`],
//! renders artifacts in memory and returns the JSON parameters echoed into
//! the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use millscope::analysis::{
    citation_cartel_score, null_density_baseline, peer_review_overlap, OverlapContext,
};
use millscope::corpus::{read_csv_publications, read_jsonl_publications, InputFormat};
use millscope::detector::{Detector, FilterMask};
use millscope::graph::uniqueness_bin;
use millscope::report::{
    country_profile, institution_review_load, journal_exposure, publisher_profile, BAND_LABELS,
};
use millscope::synthgen::{evaluate, evaluate_pooled, generate, GroundTruth};
use millscope::{corpus, Corpus, DetectorParams, Error, FlagType, Real, ResearcherIdx, YearRange};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::ReportKind;
use crate::artifacts::{Artifacts, FileDigest, Manifest};
use crate::config::RunConfig;
use crate::error::{ensure, CliError, CliResult};

/// Floating-point type of emitted values.
pub trait Scalar: Real + Serialize {}
impl<T: Real + Serialize> Scalar for T {}

/// Inputs read so far and artifacts rendered so far.
pub struct Session {
    pub cfg: RunConfig,
    command: &'static str,
    inputs: BTreeMap<String, FileDigest>,
    pub artifacts: Artifacts,
}

impl Session {
    pub fn new(cfg: RunConfig, command: &'static str) -> Self {
        Session {
            cfg,
            command,
            inputs: BTreeMap::new(),
            artifacts: Artifacts::default(),
        }
    }

    fn read(&mut self, role: &str, path: &Path) -> CliResult<Vec<u8>> {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        self.inputs
            .insert(role.to_string(), FileDigest::of(path, &bytes));
        Ok(bytes)
    }

    fn corpus(&mut self) -> CliResult<Corpus> {
        let path = required(&self.cfg.inputs.corpus, "corpus")?;
        let format = InputFormat::from_path(&path).ok_or_else(|| {
            CliError::usage(format!(
                "{}: expected a .jsonl or .csv corpus",
                path.display()
            ))
        })?;
        let bytes = self.read("corpus", &path)?;
        let records = match format {
            InputFormat::Jsonl => read_jsonl_publications(&bytes[..]),
            InputFormat::Csv => read_csv_publications(&bytes[..]),
        }
        .map_err(|e| CliError::at(&path, e))?;
        let corpus = Corpus::from_records(records).map_err(|e| CliError::at(&path, e))?;
        log::info!(
            "{}: {} publications, {} researchers",
            path.display(),
            corpus.len(),
            corpus.researcher_count()
        );
        Ok(corpus)
    }

    /// Reads `inputs.params`, if given, into `cfg.detector`.
    pub fn load_detector_params(&mut self) -> CliResult<()> {
        if let Some(path) = self.cfg.inputs.params.clone() {
            let bytes = self.read("params", &path)?;
            let text = String::from_utf8(bytes)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            self.cfg.detector = toml::from_str::<DetectorParams>(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            self.cfg.detector.validate()?;
        }
        Ok(())
    }

    /// Commits the artifacts and a `<stem>.manifest.json` into the output
    /// directory.
    pub fn finish(self, stem: &str, params: Value) -> CliResult<Vec<PathBuf>> {
        let seeds = BTreeMap::from([
            ("nullmodel", self.cfg.nullmodel.seed),
            ("overlap", self.cfg.overlap.seed),
            ("synth", self.cfg.synth.seed),
        ]);
        let manifest = Manifest {
            tool: "millscope",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.to_string(),
            inputs: self.inputs,
            seeds,
            params,
            artifacts: self.artifacts.digests(),
        };
        let name = format!("{stem}.manifest.json");
        self.artifacts.commit(&self.cfg.out_dir, &name, &manifest)
    }
}

fn required(path: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    path.clone().ok_or_else(|| {
        CliError::usage(format!(
            "no {what} given (flag --{what} or [inputs] {what})"
        ))
    })
}

fn required_year(cfg: &RunConfig) -> CliResult<i32> {
    cfg.year
        .ok_or_else(|| CliError::usage("no analysis year given (flag --year or `year`)"))
}

/// Input paths the subcommand needs, checked before any work starts.
pub fn required_inputs(cfg: &RunConfig, command: &str) -> CliResult<()> {
    let mut needed: Vec<(&Option<PathBuf>, &str)> = Vec::new();
    if command != "synth" {
        needed.push((&cfg.inputs.corpus, "corpus"));
    }
    match command {
        "validate" => needed.push((&cfg.inputs.flags, "flags")),
        "reviews" => needed.push((&cfg.inputs.reviews, "reviews")),
        "evaluate" => needed.push((&cfg.inputs.truth, "truth")),
        _ => {}
    }
    for (path, what) in needed {
        let path = required(path, what)?;
        read_text_exists(&path)?;
    }
    if let Some(path) = &cfg.inputs.params {
        read_text_exists(path)?;
    }
    Ok(())
}

fn read_text_exists(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "`{}` does not exist",
            path.display()
        )))
    }
}

fn to_value<S: Serialize>(value: &S) -> Value {
    serde_json::to_value(value).expect("parameters serialise")
}

fn corpus_range(corpus: &Corpus) -> CliResult<YearRange> {
    corpus
        .range()
        .ok_or_else(|| CliError::data("corpus is empty"))
}

fn cohort_union(det: &Detector<'_>, years: YearRange) -> CliResult<BTreeSet<ResearcherIdx>> {
    let mut members = BTreeSet::new();
    for year in years.years() {
        members.extend(det.cohort(year)?.lcc_members);
    }
    Ok(members)
}

#[derive(Serialize)]
struct ProfileRow<'a> {
    researcher_id: &'a str,
    first_pub_year: i32,
    last_pub_year: i32,
    total_eligible_pubs: u32,
    latest_country: Option<&'a str>,
    latest_institution: Option<&'a str>,
}

pub fn ingest(s: &mut Session) -> CliResult<(String, Value)> {
    let corpus = s.corpus()?;
    let range = corpus_range(&corpus)?;
    let rows = corpus.profiles().iter().map(|p| ProfileRow {
        researcher_id: &p.researcher_id,
        first_pub_year: p.first_pub_year,
        last_pub_year: p.last_pub_year,
        total_eligible_pubs: p.pubs_by_year.values().sum(),
        latest_country: p.latest_country.as_deref(),
        latest_institution: p.latest_institution.as_deref(),
    });
    s.artifacts.csv(
        "profiles.csv",
        &[
            "researcher_id",
            "first_pub_year",
            "last_pub_year",
            "total_eligible_pubs",
            "latest_country",
            "latest_institution",
        ],
        rows,
    )?;
    let by_year: BTreeMap<i32, Value> = range
        .years()
        .map(|y| {
            let stats = json!({
                "publications": corpus.publications_in(y).len(),
                "eligible": corpus.eligible_in(y).count(),
                "active_researchers": corpus.active_in(y).len(),
            });
            (y, stats)
        })
        .collect();
    let eligible: usize = range.years().map(|y| corpus.eligible_in(y).count()).sum();
    s.artifacts.json(
        "ingest.json",
        &json!({
            "range": range,
            "n_publications": corpus.len(),
            "n_eligible": eligible,
            "n_researchers": corpus.researcher_count(),
            "by_year": by_year,
        }),
    )?;
    Ok(("ingest".into(), json!({})))
}

#[derive(Serialize)]
struct ShapeRow<'a, T> {
    researcher_id: &'a str,
    year: i32,
    total_nodes: u64,
    total_edges: u64,
    clustering_coefficient: T,
    shape_frequency: u64,
    bin: u32,
}

pub fn shapes<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let year = required_year(&s.cfg)?;
    let corpus = s.corpus()?;
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let shapes = det.year_shapes(year)?;

    let total: u64 = shapes.frequency.values().sum();
    let active = corpus.active_in(year).len();
    ensure(
        total as usize == active && shapes.shapes.len() == active,
        || format!("shape frequencies sum to {total}, {active} researchers active in {year}"),
    )?;

    let mut rows = Vec::with_capacity(shapes.shapes.len());
    let mut bins: BTreeMap<u32, usize> = BTreeMap::new();
    for shape in &shapes.shapes {
        let frequency = det.shape_frequency(&shapes, &shape.key())?;
        let bin = uniqueness_bin(frequency)?;
        *bins.entry(bin).or_default() += 1;
        let c = shape.clustering_coefficient;
        rows.push(ShapeRow {
            researcher_id: corpus.researcher_id(shape.researcher),
            year,
            total_nodes: shape.total_nodes,
            total_edges: shape.total_edges,
            clustering_coefficient: T::from_u64(*c.numer()).expect("finite")
                / T::from_u64(*c.denom()).expect("finite"),
            shape_frequency: frequency,
            bin,
        });
    }
    rows.sort_by(|a, b| a.researcher_id.cmp(b.researcher_id));

    let stem = format!("shapes_{year}");
    s.artifacts.csv(
        format!("{stem}.csv"),
        &[
            "researcher_id",
            "year",
            "total_nodes",
            "total_edges",
            "clustering_coefficient",
            "shape_frequency",
            "bin",
        ],
        rows,
    )?;
    let params = json!({ "year": year, "detector": to_value(&s.cfg.detector) });
    s.artifacts.json(
        format!("{stem}.json"),
        &json!({
            "year": year,
            "n_researchers": active,
            "n_distinct_shapes": shapes.frequency.len(),
            "researchers_by_bin": bins,
            "params": params,
        }),
    )?;
    Ok((stem, params))
}

#[derive(Serialize)]
struct DetectRow<'a> {
    researcher_id: &'a str,
    passed_filters: u8,
    in_lcc: bool,
}

const FILTERS: [(&str, FilterMask); 5] = [
    ("young_ego", FilterMask::YOUNG_EGO),
    ("rare_shape", FilterMask::RARE_SHAPE),
    ("high_volume", FilterMask::HIGH_VOLUME),
    ("young_top_collaborator", FilterMask::YOUNG_TOP_COLLABORATOR),
    ("young_network", FilterMask::YOUNG_NETWORK),
];

pub fn detect<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let year = required_year(&s.cfg)?;
    let corpus = s.corpus()?;
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let outcomes = det.filter_outcomes(year)?;
    let cohort = det.cohort(year)?;

    let passing: BTreeSet<ResearcherIdx> = outcomes
        .iter()
        .filter(|o| o.mask.passes_all())
        .map(|o| o.researcher)
        .collect();
    ensure(passing == cohort.candidates, || {
        format!("{year}: candidates differ from researchers passing every filter")
    })?;
    ensure(cohort.lcc_members.is_subset(&cohort.candidates), || {
        format!("{year}: component members outside the candidate set")
    })?;
    ensure(
        cohort.component_sizes.iter().sum::<usize>() == cohort.candidates.len(),
        || format!("{year}: components do not partition the candidates"),
    )?;

    let mut rows: Vec<DetectRow> = outcomes
        .iter()
        .map(|o| DetectRow {
            researcher_id: corpus.researcher_id(o.researcher),
            passed_filters: o.mask.bits(),
            in_lcc: cohort.lcc_members.contains(&o.researcher),
        })
        .collect();
    rows.sort_by(|a, b| a.researcher_id.cmp(b.researcher_id));

    let pass_counts: BTreeMap<&str, usize> = FILTERS
        .iter()
        .map(|&(name, f)| (name, outcomes.iter().filter(|o| o.mask.contains(f)).count()))
        .collect();
    let mut size_distribution: BTreeMap<usize, usize> = BTreeMap::new();
    for &size in &cohort.component_sizes {
        *size_distribution.entry(size).or_default() += 1;
    }

    let stem = format!("detect_{year}");
    s.artifacts.csv(
        format!("{stem}.csv"),
        &["researcher_id", "passed_filters", "in_lcc"],
        rows,
    )?;
    let params = json!({ "year": year, "detector": to_value(&s.cfg.detector) });
    s.artifacts.json(
        format!("{stem}.json"),
        &json!({
            "year": year,
            "window": cohort.window,
            "n_active": outcomes.len(),
            "n_candidates": cohort.candidates.len(),
            "n_lcc": cohort.lcc_members.len(),
            "lcc_share": cohort.lcc_share::<T>(),
            "n_components": cohort.component_sizes.len(),
            "component_size_distribution": size_distribution,
            "filter_pass_counts": pass_counts,
            "params": params,
        }),
    )?;
    Ok((stem, params))
}

pub fn trend<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let corpus = s.corpus()?;
    let years = match s.cfg.years {
        Some(y) => y,
        None => corpus_range(&corpus)?,
    };
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let points = det.trend::<T>(years)?;
    for p in &points {
        ensure(p.n_lcc <= p.n_candidates, || {
            format!("{}: component larger than the candidate set", p.year)
        })?;
    }
    s.artifacts.csv(
        "trend.csv",
        &[
            "year",
            "stage12_population",
            "n_candidates",
            "n_lcc",
            "pct_candidates",
            "pct_lcc",
            "lcc_share",
        ],
        &points,
    )?;
    let params = json!({ "years": years, "detector": to_value(&s.cfg.detector) });
    s.artifacts
        .json("trend.json", &json!({ "points": points, "params": params }))?;
    Ok(("trend".into(), params))
}

#[derive(Serialize)]
struct SampleRow<T> {
    sample: usize,
    density: T,
    lcc_ratio: T,
}

pub fn nullmodel<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let year = required_year(&s.cfg)?;
    let corpus = s.corpus()?;
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let cohort = det.cohort(year)?;
    let spec = s.cfg.nullmodel.clone();
    let result = null_density_baseline::<T>(&corpus, &cohort, &spec)?;
    ensure(result.densities.len() == spec.n_samples, || {
        format!(
            "{} samples drawn, {} requested",
            result.densities.len(),
            spec.n_samples
        )
    })?;

    let rows = result
        .densities
        .iter()
        .zip(&result.lcc_ratios)
        .enumerate()
        .map(|(sample, (&density, &lcc_ratio))| SampleRow {
            sample,
            density,
            lcc_ratio,
        });
    let stem = format!("nullmodel_{year}");
    s.artifacts.csv(
        format!("{stem}.csv"),
        &["sample", "density", "lcc_ratio"],
        rows,
    )?;

    let density_ratio = if result.density.mean > T::zero() {
        Some(result.observed_density / result.density.mean)
    } else {
        None
    };
    let params = json!({
        "year": year,
        "nullmodel": to_value(&spec),
        "detector": to_value(&s.cfg.detector),
    });
    s.artifacts.json(
        format!("{stem}.json"),
        &json!({
            "year": year,
            "seed": result.seed,
            "sample_size": result.sample_size,
            "n_samples": result.n_samples,
            "pool_size": result.pool_size,
            "density": result.density,
            "lcc_ratio": result.lcc_ratio,
            "observed_density": result.observed_density,
            "observed_lcc_ratio": result.observed_lcc_ratio,
            "density_ratio": density_ratio,
            "params": params,
        }),
    )?;
    Ok((stem, params))
}

#[derive(Serialize)]
struct OverlapRow<'a, T> {
    flaglist: &'a str,
    flag_type: FlagType,
    n_listed: usize,
    n_flagged_eligible: usize,
    n_direct: usize,
    n_one_degree: usize,
    pct_direct: T,
    pct_one_degree: T,
    baseline_pct_direct_mean: T,
    baseline_pct_direct_sd: T,
    baseline_pct_one_degree_mean: T,
    baseline_pct_one_degree_sd: T,
}

#[derive(Serialize)]
struct BaselineRow<'a, T> {
    flaglist: &'a str,
    sample: usize,
    pct_direct: T,
    pct_one_degree: T,
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "flags".into())
}

pub fn validate<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let (window, cohort_years) = match (s.cfg.overlap.window, s.cfg.cohort_years) {
        (Some(w), Some(c)) => (w, c),
        (Some(w), None) => (w, w),
        (None, Some(c)) => (c, c),
        (None, None) => {
            return Err(CliError::usage(
                "no window given (flag --window or --cohort-years)",
            ))
        }
    };
    let corpus = s.corpus()?;
    let flags_path = required(&s.cfg.inputs.flags, "flags")?;
    let bytes = s.read("flags", &flags_path)?;
    let lists = corpus::read_flag_lists(&bytes[..], &file_stem(&flags_path))
        .map_err(|e| CliError::at(&flags_path, e))?;

    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let cohort = cohort_union(&det, cohort_years)?;
    let context = OverlapContext::new(&corpus, &cohort, window)?;
    let (n_samples, seed) = (s.cfg.overlap.n_samples, s.cfg.overlap.seed);

    let mut reports = Vec::new();
    let mut baselines = Vec::new();
    let mut retraction_rates = BTreeMap::new();
    let mut skipped = Vec::new();
    for list in &lists {
        let report = match context.report::<T>(list) {
            Ok(r) => r,
            Err(Error::EmptyFlagList(name)) => {
                log::warn!("flag list `{name}` has no eligible papers in {window}; skipped");
                skipped.push(name);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        ensure(report.pct_direct <= report.pct_one_degree, || {
            format!("{}: direct overlap exceeds one-degree overlap", list.name())
        })?;
        let baseline = context.random_baseline::<T>(report.n_flagged_eligible, n_samples, seed)?;
        if list.flag_type() == FlagType::RetractionIntegrity {
            let papers = context.restrict(list.pub_ids());
            let rate: T = millscope::scalar::ratio(context.counts(&papers).0, papers.len());
            retraction_rates.insert(list.name().to_string(), rate);
        }
        reports.push(report);
        baselines.push(baseline);
    }
    if reports.is_empty() {
        return Err(CliError::data(format!(
            "{}: no flag list has eligible papers in {window}",
            flags_path.display()
        )));
    }

    let flagged: BTreeSet<String> = lists
        .iter()
        .flat_map(|l| l.pub_ids().iter().cloned())
        .collect();
    let cartel = match citation_cartel_score::<T>(&corpus, &flagged) {
        Ok(score) => Some(score),
        Err(Error::NoCitations) => None,
        Err(e) => return Err(e.into()),
    };

    let rows = reports.iter().zip(&baselines).map(|(r, b)| OverlapRow {
        flaglist: &r.flaglist_name,
        flag_type: r.flag_type,
        n_listed: r.n_listed,
        n_flagged_eligible: r.n_flagged_eligible,
        n_direct: r.n_direct,
        n_one_degree: r.n_one_degree,
        pct_direct: r.pct_direct,
        pct_one_degree: r.pct_one_degree,
        baseline_pct_direct_mean: b.direct.mean,
        baseline_pct_direct_sd: b.direct.sd,
        baseline_pct_one_degree_mean: b.one_degree.mean,
        baseline_pct_one_degree_sd: b.one_degree.sd,
    });
    s.artifacts.csv(
        "overlap.csv",
        &[
            "flaglist",
            "flag_type",
            "n_listed",
            "n_flagged_eligible",
            "n_direct",
            "n_one_degree",
            "pct_direct",
            "pct_one_degree",
            "baseline_pct_direct_mean",
            "baseline_pct_direct_sd",
            "baseline_pct_one_degree_mean",
            "baseline_pct_one_degree_sd",
        ],
        rows,
    )?;
    let samples = reports.iter().zip(&baselines).flat_map(|(r, b)| {
        b.pct_direct_samples
            .iter()
            .zip(&b.pct_one_degree_samples)
            .enumerate()
            .map(|(sample, (&pct_direct, &pct_one_degree))| BaselineRow {
                flaglist: &r.flaglist_name,
                sample,
                pct_direct,
                pct_one_degree,
            })
    });
    s.artifacts.csv(
        "overlap_baseline.csv",
        &["flaglist", "sample", "pct_direct", "pct_one_degree"],
        samples,
    )?;

    let params = json!({
        "window": window,
        "cohort_years": cohort_years,
        "overlap": { "n_samples": n_samples, "seed": seed },
        "detector": to_value(&s.cfg.detector),
    });
    let summaries: Vec<Value> = reports
        .iter()
        .zip(&baselines)
        .map(|(r, b)| {
            json!({
                "report": r,
                "baseline": {
                    "set_size": b.set_size,
                    "population": b.population,
                    "direct": b.direct,
                    "one_degree": b.one_degree,
                },
            })
        })
        .collect();
    s.artifacts.json(
        "validate.json",
        &json!({
            "n_cohort": cohort.len(),
            "n_one_degree": context.one_degree().len(),
            "lists": summaries,
            "skipped": skipped,
            "retraction_rates": retraction_rates,
            "citation_cartel_score": cartel,
            "seed": seed,
            "params": params,
        }),
    )?;
    Ok(("validate".into(), params))
}

#[derive(Serialize)]
struct ReviewerRow<'a> {
    researcher_id: &'a str,
    in_cohort: bool,
}

pub fn reviews<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let end_year = required_year(&s.cfg)?;
    let cohort_years = s.cfg.cohort_years.unwrap_or(YearRange::single(end_year));
    let corpus = s.corpus()?;
    let path = required(&s.cfg.inputs.reviews, "reviews")?;
    let bytes = s.read("reviews", &path)?;
    let records = corpus::read_peer_reviews(&bytes[..]).map_err(|e| CliError::at(&path, e))?;

    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let cohort = cohort_union(&det, cohort_years)?;
    let spec = s.cfg.reviews.clone();
    let report = peer_review_overlap::<T>(&records, &corpus, &cohort, end_year, &spec)?;
    ensure(report.n_heavy_in_cohort <= report.n_heavy_connected, || {
        "heavy reviewers in the cohort exceed those connected to it".into()
    })?;

    let rows = report.heavy_reviewers.iter().map(|id| ReviewerRow {
        researcher_id: id,
        in_cohort: corpus
            .researcher_idx(id)
            .is_some_and(|r| cohort.contains(&r)),
    });
    s.artifacts
        .csv("reviewers.csv", &["researcher_id", "in_cohort"], rows)?;
    s.artifacts.csv(
        "review_journals.csv",
        &["journal_id", "reviews", "publications", "ratio", "flagged"],
        &report.journals,
    )?;
    let params = json!({
        "year": end_year,
        "cohort_years": cohort_years,
        "reviews": to_value(&spec),
        "detector": to_value(&s.cfg.detector),
    });
    s.artifacts.json(
        "reviews.json",
        &json!({
            "window": report.window,
            "n_cohort": cohort.len(),
            "n_reviewers": report.n_reviewers,
            "n_heavy": report.n_heavy,
            "n_heavy_in_cohort": report.n_heavy_in_cohort,
            "pct_heavy_in_cohort": report.pct_heavy_in_cohort,
            "n_heavy_connected": report.n_heavy_connected,
            "pct_heavy_connected": report.pct_heavy_connected,
            "pct_population_in_cohort": report.pct_population_in_cohort,
            "reviews_matched": report.reviews_matched,
            "reviews_unmatched": report.reviews_unmatched,
            "params": params,
        }),
    )?;
    Ok(("reviews".into(), params))
}

const EXPOSURE_HEADER: [&str; 8] = [
    "entity_kind",
    "entity_id",
    "year",
    "total_pubs",
    "implicated_pubs",
    "pct_implicated",
    "connected_researchers",
    "junior_connected",
];

pub fn report<T: Scalar>(s: &mut Session, kind: ReportKind) -> CliResult<(String, Value)> {
    let corpus = s.corpus()?;
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let stem = format!("report_{}", kind.name());
    let (params, summary) = match kind {
        ReportKind::Publisher => {
            let years = match (s.cfg.years, s.cfg.year) {
                (Some(y), _) => y,
                (None, Some(y)) => YearRange::single(y),
                (None, None) => corpus_range(&corpus)?,
            };
            let mut cohorts = BTreeMap::new();
            for year in years.years() {
                cohorts.insert(year, det.cohort(year)?.lcc_members);
            }
            let rows = publisher_profile::<T>(&corpus, &cohorts, years);
            let mut per_year: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
            for r in &rows {
                let e = per_year.entry(r.year).or_default();
                e.0 += r.total_pubs;
                e.1 += r.implicated_pubs;
            }
            for (&year, &(total, implicated)) in &per_year {
                let distinct = corpus
                    .eligible_in(year)
                    .filter(|&p| {
                        corpus
                            .resolved_authors(p)
                            .iter()
                            .any(|r| cohorts[&year].contains(r))
                    })
                    .count();
                ensure(
                    implicated == distinct && total == corpus.eligible_in(year).count(),
                    || format!("{year}: publisher counts do not partition the eligible papers"),
                )?;
            }
            s.artifacts
                .csv(format!("{stem}.csv"), &EXPOSURE_HEADER, &rows)?;
            let totals: BTreeMap<i32, Value> = per_year
                .into_iter()
                .map(|(y, (t, i))| (y, json!({ "total_pubs": t, "implicated_pubs": i })))
                .collect();
            (
                json!({ "years": years }),
                json!({ "n_rows": rows.len(), "by_year": totals }),
            )
        }
        ReportKind::Journal => {
            let year = required_year(&s.cfg)?;
            let cohort = det.cohort(year)?.lcc_members;
            let min_pubs = s.cfg.report.journal_min_pubs;
            let exposure = journal_exposure::<T>(&corpus, &cohort, year, min_pubs);
            ensure(
                exposure.bands.iter().sum::<usize>() == exposure.rows.len(),
                || format!("{year}: journal bands do not sum to the assessed journals"),
            )?;
            s.artifacts
                .csv(format!("{stem}.csv"), &EXPOSURE_HEADER, &exposure.rows)?;
            let bands: BTreeMap<&str, usize> =
                BAND_LABELS.iter().copied().zip(exposure.bands).collect();
            (
                json!({ "year": year, "journal_min_pubs": min_pubs }),
                json!({ "n_journals": exposure.rows.len(), "bands_pct": bands }),
            )
        }
        ReportKind::Country => {
            let year = required_year(&s.cfg)?;
            let cohort = det.cohort(year)?.lcc_members;
            let rows = country_profile::<T>(&corpus, &cohort, year);
            ensure(
                rows.iter().map(|r| r.n_cohort_researchers).sum::<usize>() == cohort.len(),
                || format!("{year}: country rows do not cover the cohort"),
            )?;
            s.artifacts.csv(
                format!("{stem}.csv"),
                &[
                    "country",
                    "year",
                    "n_cohort_researchers",
                    "pct_of_cohort",
                    "stage12_workforce",
                    "pct_of_stage12_workforce",
                    "total_articles",
                    "implicated_articles",
                    "pct_articles_implicated",
                    "n_institutions",
                ],
                &rows,
            )?;
            (
                json!({ "year": year }),
                json!({ "n_cohort": cohort.len(), "n_countries": rows.len() }),
            )
        }
        ReportKind::Institution => {
            let year = required_year(&s.cfg)?;
            let cohort = det.cohort(year)?.lcc_members;
            let min_researchers = s.cfg.report.institution_min_researchers;
            let rows = institution_review_load::<T>(&corpus, &cohort, year, min_researchers)?;
            s.artifacts.csv(
                format!("{stem}.csv"),
                &[
                    "country",
                    "year",
                    "n_institutions",
                    "total_researchers",
                    "total_connected",
                    "total_junior_connected",
                    "avg_connected_per_institution",
                    "avg_junior_connected",
                ],
                &rows,
            )?;
            (
                json!({ "year": year, "institution_min_researchers": min_researchers }),
                json!({
                    "n_cohort": cohort.len(),
                    "n_institutions": rows.iter().map(|r| r.n_institutions).sum::<usize>(),
                }),
            )
        }
    };
    let mut params = params;
    params["kind"] = json!(kind.name());
    params["detector"] = to_value(&s.cfg.detector);
    let mut summary = summary;
    summary["params"] = params.clone();
    s.artifacts.json(format!("{stem}.json"), &summary)?;
    Ok((stem, params))
}

pub fn synth(s: &mut Session) -> CliResult<(String, Value)> {
    let cfg = s.cfg.synth.clone();
    let out = generate(&cfg)?;
    s.artifacts
        .with_writer("corpus.jsonl", |w| corpus::write_jsonl(&out.corpus, w))?;
    s.artifacts.with_writer("flags.csv", |w| {
        corpus::write_flag_list(out.flags.as_ref(), w)
    })?;
    s.artifacts.with_writer("reviews.csv", |w| {
        corpus::write_peer_reviews(&out.reviews, w)
    })?;
    s.artifacts
        .with_writer("truth.json", |w| out.truth.write_json(w))?;
    let params = json!({ "synth": to_value(&cfg) });
    s.artifacts.json(
        "synth.json",
        &json!({
            "n_publications": out.corpus.len(),
            "n_researchers": out.corpus.researcher_count(),
            "n_mill_researchers": out.truth.mill_researchers.len(),
            "n_mill_papers": out.truth.mill_papers.len(),
            "n_flagged": out.flags.as_ref().map_or(0, |f| f.pub_ids().len()),
            "n_review_records": out.reviews.len(),
            "seed": cfg.seed,
            "params": params,
        }),
    )?;
    Ok(("synth".into(), params))
}

#[derive(Serialize)]
struct EvaluationRow<T> {
    scope: String,
    n_cohort: usize,
    n_true_positive: usize,
    n_qualifying: usize,
    n_recalled: usize,
    precision: T,
    recall: T,
    f1: T,
}

impl<T: Copy> EvaluationRow<T> {
    fn new(scope: String, e: &millscope::synthgen::Evaluation<T>) -> Self {
        EvaluationRow {
            scope,
            n_cohort: e.n_cohort,
            n_true_positive: e.n_true_positive,
            n_qualifying: e.n_qualifying,
            n_recalled: e.n_recalled,
            precision: e.precision,
            recall: e.recall,
            f1: e.f1,
        }
    }
}

pub fn evaluate_truth<T: Scalar>(s: &mut Session) -> CliResult<(String, Value)> {
    let corpus = s.corpus()?;
    let path = required(&s.cfg.inputs.truth, "truth")?;
    let bytes = s.read("truth", &path)?;
    let truth: GroundTruth = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data(format!("{}: line {}: {e}", path.display(), e.line())))?;
    let years = match s.cfg.years {
        Some(y) => y,
        None => corpus_range(&corpus)?,
    };
    let min = s.cfg.evaluate.min_mill_papers;
    let det = Detector::new(&corpus, s.cfg.detector.clone())?;
    let mut cohorts = Vec::new();
    let mut rows = Vec::new();
    for year in years.years() {
        let cohort = det.cohort(year)?;
        let e = evaluate::<T>(&corpus, &cohort, &truth, min).map_err(|e| CliError::at(&path, e))?;
        rows.push(EvaluationRow::new(year.to_string(), &e));
        cohorts.push(cohort);
    }
    let pooled = evaluate_pooled::<T>(&corpus, &cohorts, &truth, min)?;
    rows.push(EvaluationRow::new("pooled".into(), &pooled));
    s.artifacts.csv(
        "evaluation.csv",
        &[
            "scope",
            "n_cohort",
            "n_true_positive",
            "n_qualifying",
            "n_recalled",
            "precision",
            "recall",
            "f1",
        ],
        &rows,
    )?;
    let params = json!({
        "years": years,
        "evaluate": to_value(&s.cfg.evaluate),
        "detector": to_value(&s.cfg.detector),
    });
    s.artifacts.json(
        "evaluation.json",
        &json!({ "pooled": pooled, "params": params }),
    )?;
    Ok(("evaluation".into(), params))
}
