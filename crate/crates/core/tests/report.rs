mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use millscope::detector::{Detector, DetectorParams};
use millscope::report::{
    country_profile, exposure_band, institution_review_load, journal_exposure, publisher_profile,
    UNKNOWN_COUNTRY,
};
use millscope::synthgen::{generate, SynthConfig};
use millscope::{Corpus, PublicationRecord, ResearcherIdx, YearRange};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{
    adjacency, eligible, first_years, pair_multiplicities, random_records, resolved, stage,
};

const YEAR: i32 = 2003;

struct Fixture {
    records: Vec<PublicationRecord>,
    corpus: Corpus,
    cohort: BTreeSet<ResearcherIdx>,
    cohort_ids: BTreeSet<String>,
}

fn fixture(seed: u64, cohort_size: usize) -> Fixture {
    let records = random_records(seed, 3_000, 400, 2000..=2005);
    let corpus = Corpus::from_records(records.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let everyone: Vec<ResearcherIdx> = corpus.researcher_indices().collect();
    let cohort: BTreeSet<ResearcherIdx> = everyone
        .choose_multiple(&mut rng, cohort_size)
        .copied()
        .collect();
    let cohort_ids = cohort
        .iter()
        .map(|&r| corpus.researcher_id(r).to_string())
        .collect();
    Fixture {
        records,
        corpus,
        cohort,
        cohort_ids,
    }
}

impl Fixture {
    fn papers(&self, year: i32) -> impl Iterator<Item = &PublicationRecord> {
        self.records
            .iter()
            .filter(move |p| eligible(p) && p.year == year)
    }

    fn hit(&self, p: &PublicationRecord) -> bool {
        resolved(p).iter().any(|a| self.cohort_ids.contains(*a))
    }

    /// Affiliation country on each researcher's latest paper, ties to the
    /// greatest pub id.
    fn latest_country(&self) -> HashMap<String, String> {
        let mut best: HashMap<String, (i32, String, String)> = HashMap::new();
        for p in &self.records {
            for a in &p.authorships {
                let Some(id) = a.researcher_id.clone() else {
                    continue;
                };
                let country = a
                    .country_code
                    .clone()
                    .unwrap_or_else(|| UNKNOWN_COUNTRY.into());
                let candidate = (p.year, p.pub_id.clone(), country);
                let e = best.entry(id).or_insert(candidate.clone());
                if (candidate.0, &candidate.1) > (e.0, &e.1) {
                    *e = candidate;
                }
            }
        }
        best.into_iter().map(|(k, v)| (k, v.2)).collect()
    }
}

#[test]
fn publisher_rows_match_a_recount() {
    let f = fixture(61, 60);
    let cohorts = BTreeMap::from([(2002, f.cohort.clone()), (YEAR, f.cohort.clone())]);
    let rows = publisher_profile::<f64>(&f.corpus, &cohorts, YearRange::new(2000, 2005).unwrap());
    assert!(rows.iter().all(|r| r.year == 2002 || r.year == YEAR));
    for year in [2002, YEAR] {
        let mut recount: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for p in f.papers(year) {
            let e = recount.entry(p.publisher_id.clone()).or_default();
            e.0 += 1;
            e.1 += f.hit(p) as usize;
        }
        let got: BTreeMap<String, (usize, usize)> = rows
            .iter()
            .filter(|r| r.year == year)
            .map(|r| (r.entity_id.clone(), (r.total_pubs, r.implicated_pubs)))
            .collect();
        assert_eq!(got, recount);
        // One publisher per paper: implicated counts partition the hits.
        let distinct = f.papers(year).filter(|p| f.hit(p)).count();
        assert_eq!(got.values().map(|v| v.1).sum::<usize>(), distinct);
        for r in rows.iter().filter(|r| r.year == year) {
            assert!(
                (r.pct_implicated - 100.0 * r.implicated_pubs as f64 / r.total_pubs as f64).abs()
                    < 1e-9
            );
        }
    }
}

#[test]
fn journal_bands_match_a_recount() {
    let f = fixture(62, 15);
    let mut totals: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for p in f.papers(YEAR) {
        let e = totals.entry(p.journal_id.clone()).or_default();
        e.0 += 1;
        e.1 += f.hit(p) as usize;
    }
    // A threshold equal to one journal's size excludes exactly that journal.
    let boundary = totals.values().map(|v| v.0).min().unwrap();
    for min_pubs in [0, boundary, 50] {
        let report = journal_exposure::<f64>(&f.corpus, &f.cohort, YEAR, min_pubs);
        let kept: Vec<&(usize, usize)> = totals.values().filter(|v| v.0 > min_pubs).collect();
        assert_eq!(report.rows.len(), kept.len());
        let mut bands = [0usize; 3];
        for &&(total, hit) in &kept {
            let share = Ratio::new(hit, total);
            let band = if share < Ratio::new(2, 100) {
                0
            } else if share < Ratio::new(4, 100) {
                1
            } else {
                2
            };
            bands[band] += 1;
        }
        assert_eq!(report.bands, bands, "min_pubs {min_pubs}");
        assert_eq!(report.bands.iter().sum::<usize>(), report.rows.len());
    }
}

#[test]
fn band_edges_are_exact() {
    assert_eq!(exposure_band(0, 1000), 0);
    assert_eq!(exposure_band(19, 1000), 0);
    assert_eq!(exposure_band(20, 1000), 1);
    assert_eq!(exposure_band(39, 1000), 1);
    assert_eq!(exposure_band(40, 1000), 2);
    assert_eq!(exposure_band(1, 1), 2);
}

#[test]
fn country_rows_match_a_recount() {
    let f = fixture(63, 80);
    let latest = f.latest_country();
    let first = first_years(&f.records);
    let rows = country_profile::<f64>(&f.corpus, &f.cohort, YEAR);

    let mut members: BTreeMap<&str, usize> = BTreeMap::new();
    for id in &f.cohort_ids {
        *members.entry(latest[id].as_str()).or_default() += 1;
    }
    let active: BTreeSet<&str> = f.papers(YEAR).flat_map(resolved).collect();
    let mut workforce: BTreeMap<&str, usize> = BTreeMap::new();
    for id in active {
        if matches!(stage(first[id], YEAR), Some(1 | 2)) {
            *workforce.entry(latest[id].as_str()).or_default() += 1;
        }
    }

    assert_eq!(rows.len(), members.len());
    assert_eq!(
        rows.iter().map(|r| r.n_cohort_researchers).sum::<usize>(),
        f.cohort.len()
    );
    for row in &rows {
        assert_eq!(row.n_cohort_researchers, members[row.country.as_str()]);
        assert_eq!(
            row.stage12_workforce,
            workforce.get(row.country.as_str()).copied().unwrap_or(0)
        );
    }
    assert!(country_profile::<f64>(&f.corpus, &BTreeSet::new(), YEAR).is_empty());
}

#[test]
fn institution_loads_match_a_recount() {
    let f = fixture(64, 40);
    let first = first_years(&f.records);
    let adj = adjacency(&pair_multiplicities(&f.records, YEAR, YEAR));
    let mut connected: BTreeSet<&str> = f.cohort_ids.iter().map(String::as_str).collect();
    for id in &f.cohort_ids {
        if let Some(n) = adj.get(id) {
            connected.extend(n.keys().map(String::as_str));
        }
    }

    // Latest eligible paper of the year that names an institution.
    let mut papers: Vec<&PublicationRecord> = f.papers(YEAR).collect();
    papers.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
    let mut affiliation: HashMap<&str, (&str, &str)> = HashMap::new();
    for p in papers {
        for a in &p.authorships {
            if let (Some(id), Some(inst)) =
                (a.researcher_id.as_deref(), a.institution_id.as_deref())
            {
                affiliation.insert(
                    id,
                    (inst, a.country_code.as_deref().unwrap_or(UNKNOWN_COUNTRY)),
                );
            }
        }
    }
    // (researchers, connected, junior connected, researchers per country)
    type Tally<'a> = (usize, usize, usize, BTreeMap<&'a str, usize>);
    let mut per_inst: BTreeMap<&str, Tally> = BTreeMap::new();
    for (&id, &(inst, country)) in &affiliation {
        let e = per_inst.entry(inst).or_default();
        e.0 += 1;
        *e.3.entry(country).or_default() += 1;
        if connected.contains(id) {
            e.1 += 1;
            e.2 += matches!(stage(first[id], YEAR), Some(1 | 2)) as usize;
        }
    }
    let sizes: Vec<usize> = per_inst.values().map(|v| v.0).collect();
    let min_researchers = *sizes.iter().min().unwrap();

    let rows = institution_review_load::<f64>(&f.corpus, &f.cohort, YEAR, min_researchers).unwrap();
    let mut expected: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for (_, conn, junior, countries) in per_inst.values().filter(|v| v.0 > min_researchers) {
        let top = countries.values().max().unwrap();
        let country = countries
            .iter()
            .find(|(_, c)| *c == top)
            .map(|(k, _)| *k)
            .unwrap();
        let e = expected.entry(country).or_default();
        e.0 += 1;
        e.1 += conn;
        e.2 += junior;
    }
    assert_eq!(rows.len(), expected.len());
    for row in &rows {
        let (n, conn, junior) = expected[row.country.as_str()];
        assert_eq!(
            (
                row.n_institutions,
                row.total_connected,
                row.total_junior_connected
            ),
            (n, conn, junior)
        );
        assert!((row.avg_connected_per_institution - conn as f64 / n as f64).abs() < 1e-9);
    }
    // The smallest institution sits exactly on the threshold and is excluded.
    let counted: usize = rows.iter().map(|r| r.n_institutions).sum();
    assert_eq!(
        counted,
        sizes.iter().filter(|&&s| s > min_researchers).count()
    );
}

#[test]
fn mill_target_publisher_dominates() {
    let mut cfg = SynthConfig::default();
    cfg.years.end = 2020;
    cfg.organic.initial_researchers = 8_000;
    cfg.organic.initial_labs = 480;
    cfg.organic.new_researchers_per_year = 840;
    let out = generate(&cfg).unwrap();
    let det = Detector::new(&out.corpus, DetectorParams::default()).unwrap();
    let cohort = det.cohort(2019).unwrap().lcc_members;
    let rows = publisher_profile::<f64>(
        &out.corpus,
        &BTreeMap::from([(2019, cohort)]),
        YearRange::single(2019),
    );
    let target = format!("PB{:02}", cfg.mill.target_publisher);
    let top = rows.iter().find(|r| r.entity_id == target).unwrap();
    for r in rows.iter().filter(|r| r.entity_id != target) {
        assert!(
            top.pct_implicated > r.pct_implicated,
            "{} vs {}",
            top.pct_implicated,
            r.pct_implicated
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bands_partition_assessed_journals(seed in any::<u64>(), k in 0usize..60, min_pubs in 0usize..120) {
        let f = fixture(seed, k);
        let report = journal_exposure::<f64>(&f.corpus, &f.cohort, YEAR, min_pubs);
        prop_assert_eq!(report.bands.iter().sum::<usize>(), report.rows.len());
        for r in &report.rows {
            prop_assert!(r.implicated_pubs <= r.total_pubs && r.total_pubs > min_pubs);
        }
    }
}
