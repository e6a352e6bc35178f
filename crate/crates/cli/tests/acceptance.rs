//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use millscope::analysis::{null_density_baseline, NullModelSpec, OverlapContext};
use millscope::detector::{largest_connected_component, Detector, FilterMask};
use millscope::graph::{shape_frequency_table, YearShapes};
use millscope::synthgen::{evaluate_pooled, generate, SynthConfig, SynthOutput};
use millscope::{
    Authorship, Coefficient, Corpus, DetectorParams, DocType, PublicationRecord, ResearcherIdx,
    YearRange,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct World {
    out: SynthOutput,
    generated_in: Duration,
}

fn default_world() -> &'static World {
    static WORLD: OnceLock<World> = OnceLock::new();
    WORLD.get_or_init(|| {
        let start = Instant::now();
        let out = generate(&SynthConfig::default()).expect("default scenario generates");
        World {
            out,
            generated_in: start.elapsed(),
        }
    })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ego_coefficient(papers: &[&[&str]]) -> Coefficient {
    let records: Vec<PublicationRecord> = papers
        .iter()
        .enumerate()
        .map(|(i, authors)| PublicationRecord {
            pub_id: format!("P{i}"),
            year: 2020,
            doc_type: DocType::ResearchArticle,
            journal_id: "J".into(),
            publisher_id: "B".into(),
            authorships: authors
                .iter()
                .map(|a| Authorship {
                    researcher_id: Some(a.to_string()),
                    ..Default::default()
                })
                .collect(),
            cited_pub_ids: None,
        })
        .collect();
    let corpus = Corpus::from_records(records).unwrap();
    let shapes = YearShapes::compute(&corpus, 2020).unwrap();
    let ego = corpus.researcher_idx("ego").unwrap();
    shapes
        .shapes
        .iter()
        .find(|s| s.researcher == ego)
        .unwrap()
        .clustering_coefficient
}

fn exact_coefficients() -> Outcome {
    let clique = ego_coefficient(&[&["ego", "a", "b", "c"]]);
    let star = ego_coefficient(&[&["ego", "a"], &["ego", "b"], &["ego", "c"]]);
    let triangles = ego_coefficient(&[&["ego", "a", "b"], &["ego", "c", "d"]]);
    check(clique == Coefficient::from_integer(1), || {
        format!("4-clique gave {clique}")
    })?;
    check(star == Coefficient::from_integer(0), || {
        format!("star gave {star}")
    })?;
    check(triangles == Coefficient::new(1, 3), || {
        format!("two triangles gave {triangles}")
    })?;
    Ok(format!(
        "4-clique {clique}, star {star}, two triangles {triangles}"
    ))
}

fn bfs_lcc(n: usize, edges: &[(usize, usize)]) -> BTreeSet<usize> {
    oracle::bfs_components(n, edges)
        .into_iter()
        .map(|c| c.into_iter().collect::<BTreeSet<usize>>())
        .max_by(|a, b| a.len().cmp(&b.len()).then(b.first().cmp(&a.first())))
        .unwrap_or_default()
}

fn lcc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for g in 0..1000 {
        let n = rng.random_range(0..=200usize);
        let p: f64 = rng.random_range(0.005..=0.2);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        let nodes: Vec<usize> = (0..n).collect();
        let got = largest_connected_component(&nodes, &edges);
        check(got == bfs_lcc(n, &edges), || {
            format!("graph {g} differs from BFS")
        })?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 5.0, || format!("took {elapsed:.2} s"))?;
    Ok(format!("1000 graphs in {elapsed:.2} s"))
}

fn frequency_conservation() -> Outcome {
    let mut fixtures = vec![(
        "random",
        oracle::random_records(3, 3_000, 400, 2000..=2004),
        2000..=2004,
    )];
    fixtures.push(("planted", oracle::planted_records(4, 20, 2010), 2008..=2011));
    let mut checked = 0;
    for (name, records, years) in fixtures {
        let corpus = Corpus::from_records(records.clone()).unwrap();
        for year in years {
            let total: u64 = shape_frequency_table(&corpus, year).unwrap().values().sum();
            let active = oracle::active(&records, year).len();
            check(total as usize == active, || {
                format!("{name} {year}: {total} counted, {active} active")
            })?;
            checked += 1;
        }
    }
    let world = &default_world().out;
    for year in [2012, 2018, 2022] {
        let total: u64 = shape_frequency_table(&world.corpus, year)
            .unwrap()
            .values()
            .sum();
        let active = oracle::active(world.corpus.publications(), year).len();
        check(total as usize == active, || {
            format!("default {year}: {total} vs {active}")
        })?;
        checked += 1;
    }
    Ok(format!(
        "{checked} fixture years conserve the active population"
    ))
}

const MILL_YEARS: std::ops::RangeInclusive<i32> = 2015..=2022;
const ORACLE_YEAR: i32 = 2021;

fn end_to_end_detection() -> Outcome {
    let world = default_world();
    let out = &world.out;
    let start = Instant::now();
    let det = Detector::new(&out.corpus, DetectorParams::default()).unwrap();
    let cohorts: Vec<_> = MILL_YEARS.map(|y| det.cohort(y).unwrap()).collect();
    let eval = evaluate_pooled::<f64>(&out.corpus, &cohorts, &out.truth, 21).unwrap();
    let elapsed = world.generated_in + start.elapsed();

    // The thresholds behind the cohort agree with a brute-force recount.
    let records = out.corpus.publications();
    let expected: BTreeSet<String> = oracle::filter_bits(records, ORACLE_YEAR)
        .into_iter()
        .filter(|&(_, b)| b == FilterMask::ALL.bits())
        .map(|(id, _)| id)
        .collect();
    let cohort = &cohorts[(ORACLE_YEAR - MILL_YEARS.start()) as usize];
    let got: BTreeSet<String> = out
        .corpus
        .ids(&cohort.candidates)
        .into_iter()
        .map(String::from)
        .collect();
    check(got == expected, || {
        format!("{ORACLE_YEAR}: candidates differ from the filter oracle")
    })?;

    let (n_pubs, n_researchers) = (out.corpus.len(), out.corpus.researcher_count());
    check(eval.recall >= 0.8, || format!("recall {:.3}", eval.recall))?;
    check(eval.precision >= 0.9, || {
        format!("precision {:.3}", eval.precision)
    })?;
    check(elapsed.as_secs_f64() < 120.0, || {
        format!("took {:.1} s", elapsed.as_secs_f64())
    })?;
    Ok(format!(
        "{n_pubs} papers, {n_researchers} researchers; precision {:.3}, recall {:.3} \
         ({} of {} qualifying); {:.1} s",
        eval.precision,
        eval.recall,
        eval.n_recalled,
        eval.n_qualifying,
        elapsed.as_secs_f64()
    ))
}

const NULL_YEAR: i32 = 2021;

fn null_model_separation() -> Outcome {
    let out = &default_world().out;
    let det = Detector::new(&out.corpus, DetectorParams::default()).unwrap();
    let cohort = det.cohort(NULL_YEAR).unwrap();
    let spec = NullModelSpec {
        n_samples: 190,
        seed: 2024,
        ..Default::default()
    };
    let a = null_density_baseline::<f64>(&out.corpus, &cohort, &spec).unwrap();
    let b = null_density_baseline::<f64>(&out.corpus, &cohort, &spec).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    check(
        bits(&a.densities) == bits(&b.densities) && bits(&a.lcc_ratios) == bits(&b.lcc_ratios),
        || "reruns differ".into(),
    )?;
    check(a.n_samples >= 100, || format!("{} samples", a.n_samples))?;
    let ratio = a.observed_density / a.density.mean;
    check(ratio >= 2.0, || format!("density ratio {ratio:.2}"))?;
    check(a.observed_lcc_ratio < a.lcc_ratio.mean, || {
        format!(
            "observed LCC ratio {:.3} vs mean {:.3}",
            a.observed_lcc_ratio, a.lcc_ratio.mean
        )
    })?;
    Ok(format!(
        "{NULL_YEAR}: density {:.4} vs {:.4} ({ratio:.1}x), LCC ratio {:.3} vs {:.3}, {} samples",
        a.observed_density, a.density.mean, a.observed_lcc_ratio, a.lcc_ratio.mean, a.n_samples
    ))
}

fn phase_transition() -> Outcome {
    let out = &default_world().out;
    let cfg = SynthConfig::default();
    let ramp_start = cfg.mill.start_year;
    let det = Detector::new(&out.corpus, DetectorParams::default()).unwrap();
    let trend = det
        .trend::<f64>(YearRange::new(cfg.years.start, cfg.years.end - 1).unwrap())
        .unwrap();
    let share: BTreeMap<i32, f64> = trend.iter().map(|p| (p.year, p.lcc_share)).collect();
    let pre: Vec<f64> = share.range(..ramp_start).map(|(_, &s)| s).collect();
    let post: Vec<f64> = share.range(2019..).map(|(_, &s)| s).collect();
    check(pre.iter().all(|&s| s < 0.15), || {
        format!("pre-ramp shares {pre:?}")
    })?;
    check(post.iter().all(|&s| s > 0.60), || {
        format!("post-ramp shares {post:?}")
    })?;
    let ramp: Vec<f64> = share.range(ramp_start - 1..).map(|(_, &s)| s).collect();
    let dips = ramp.windows(2).filter(|w| w[1] < w[0]).count();
    check(dips <= 1, || format!("{dips} decreasing years in {ramp:?}"))?;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|s| format!("{:.0}%", 100.0 * s))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok(format!(
        "pre-ramp [{}], ramp [{}], {dips} dip(s)",
        fmt(&pre),
        fmt(&ramp)
    ))
}

fn overlap_discrimination() -> Outcome {
    let mut worlds: Vec<(String, &SynthOutput)> = vec![("default".into(), &default_world().out)];
    let small: Vec<SynthOutput> = (0..3)
        .map(|seed| {
            let mut cfg = SynthConfig::default();
            cfg.organic.initial_researchers = 8_000;
            cfg.seed = 100 + seed;
            cfg.organic.initial_labs = 480;
            cfg.organic.new_researchers_per_year = 840;
            generate(&cfg).unwrap()
        })
        .collect();
    worlds.extend(
        small
            .iter()
            .enumerate()
            .map(|(i, w)| (format!("small #{i}"), w)),
    );

    let window = YearRange::new(2020, 2022).unwrap();
    let mut lines = Vec::new();
    for (name, out) in worlds {
        let det = Detector::new(&out.corpus, DetectorParams::default()).unwrap();
        let cohort: BTreeSet<ResearcherIdx> = (2020..=2021)
            .flat_map(|y| det.cohort(y).unwrap().lcc_members)
            .collect();
        let context = OverlapContext::new(&out.corpus, &cohort, window).unwrap();
        let report = context.report::<f64>(out.flags.as_ref().unwrap()).unwrap();
        let baseline = context
            .random_baseline::<f64>(report.n_flagged_eligible, 100, 17)
            .unwrap();
        check(report.pct_direct <= report.pct_one_degree, || {
            format!(
                "{name}: direct {} above one-degree {}",
                report.pct_direct, report.pct_one_degree
            )
        })?;
        check(baseline.direct.mean <= baseline.one_degree.mean, || {
            format!("{name}: baseline direct above one-degree")
        })?;
        check(report.pct_direct >= 5.0 * baseline.direct.mean, || {
            format!(
                "{name}: {:.1}% vs baseline {:.1}%",
                report.pct_direct, baseline.direct.mean
            )
        })?;
        lines.push(format!(
            "{name} {:.1}%/{:.1}% vs {:.1}%/{:.1}%",
            report.pct_direct,
            report.pct_one_degree,
            baseline.direct.mean,
            baseline.one_degree.mean
        ));
    }
    Ok(lines.join("; "))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("first"), tmp.path().join("second"));
    let config = common::fixture_config();
    common::pipeline(&config, &a, 0);
    common::pipeline(&config, &b, 0);
    let (da, db) = (common::digests(&a), common::digests(&b));
    check(!da.is_empty() && da == db, || {
        let differing: Vec<&String> = da.keys().filter(|k| da.get(*k) != db.get(*k)).collect();
        format!("differing artifacts {differing:?}")
    })?;
    Ok(format!(
        "{} artifacts byte-identical across two pipeline runs",
        da.len()
    ))
}

type Criterion = (u8, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "exact clustering coefficients", exact_coefficients),
        (2, "largest component matches BFS", lcc_oracle),
        (3, "shape frequency conservation", frequency_conservation),
        (4, "end-to-end synthetic detection", end_to_end_detection),
        (5, "null-model separation", null_model_separation),
        (6, "phase-transition direction", phase_transition),
        (7, "overlap discrimination", overlap_discrimination),
        (8, "pipeline determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {id} {name}: {reason}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
