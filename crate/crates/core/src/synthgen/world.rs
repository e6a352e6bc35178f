use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Poisson};

use super::{GroundTruth, SynthConfig, SynthOutput};
use crate::corpus::{
    Authorship, Corpus, DocType, FlagList, FlagType, PeerReviewRecord, PublicationRecord,
    MAX_AUTHORS,
};
use crate::error::{Error, Result};

const NO_LAB: u32 = u32::MAX;
const NEVER: i32 = i32::MIN;
/// Largest age treated as "young" when recruiting buyers and collaborators.
const YOUNG_AGE: u32 = 9;

struct Researcher {
    debut: i32,
    lab: u32,
    institution: u32,
    active: bool,
    mill_year: i32,
    prolific_year: i32,
    /// Mean-one multiplier on every publication rate.
    productivity: f64,
}

struct Lab {
    pi: u32,
    members: Vec<u32>,
    institution: u32,
    journals: Vec<u16>,
    partners: Vec<u32>,
}

struct Paper {
    year: i32,
    doc_type: DocType,
    journal: u16,
    authors: Vec<u32>,
    unresolved: bool,
    cites: Vec<u32>,
}

/// Token queue of one mill journal: customer slots and casual slots.
#[derive(Default)]
struct SlotQueue {
    customers: VecDeque<u32>,
    casual: VecDeque<u32>,
}

pub(super) struct World<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    researchers: Vec<Researcher>,
    labs: Vec<Lab>,
    papers: Vec<Paper>,
    countries: Vec<String>,
    institution_country: Vec<usize>,
    institutions_by_country: Vec<Vec<u32>>,
    mill_journals: Vec<u16>,
    /// Organic research articles of completed years, citable by later papers.
    citable: Vec<u32>,
    mill_papers: Vec<u32>,
    foundation: Vec<u32>,
    home_journal: BTreeMap<u32, usize>,
    customers_by_year: BTreeMap<i32, Vec<u32>>,
    casual: BTreeSet<u32>,
    prolific: BTreeMap<i32, Vec<u32>>,
    mill_reviewers: BTreeSet<u32>,
    /// (researcher, first year, last year, journal pool is mill)
    heavy_reviewers: Vec<(u32, i32, i32, bool)>,
    reviews: BTreeMap<(u32, i32, u16), u64>,
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let sample: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    sample as usize
}

impl<'a> World<'a> {
    pub(super) fn new(cfg: &'a SynthConfig) -> Self {
        let mut countries = cfg.organic.countries.clone();
        for code in cfg.mill.customer_countries.keys() {
            if !countries.contains(code) {
                countries.push(code.clone());
            }
        }
        World {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            researchers: Vec::new(),
            labs: Vec::new(),
            papers: Vec::new(),
            countries,
            institution_country: Vec::new(),
            institutions_by_country: Vec::new(),
            mill_journals: Vec::new(),
            citable: Vec::new(),
            mill_papers: Vec::new(),
            foundation: Vec::new(),
            home_journal: BTreeMap::new(),
            customers_by_year: BTreeMap::new(),
            casual: BTreeSet::new(),
            prolific: BTreeMap::new(),
            mill_reviewers: BTreeSet::new(),
            heavy_reviewers: Vec::new(),
            reviews: BTreeMap::new(),
        }
    }

    pub(super) fn run(mut self) -> Result<SynthOutput> {
        self.setup()?;
        for year in self.cfg.years.years() {
            self.step(year)?;
            self.citable.extend(
                self.papers
                    .iter()
                    .enumerate()
                    .skip(self.citable.last().map_or(0, |&p| p as usize + 1))
                    .filter(|(i, p)| {
                        p.year == year
                            && p.doc_type == DocType::ResearchArticle
                            && !self.mill_papers.contains(&(*i as u32))
                    })
                    .map(|(i, _)| i as u32),
            );
        }
        self.cite_mill_papers();
        self.finish()
    }

    fn age(&self, r: u32, year: i32) -> u32 {
        (year - self.researchers[r as usize].debut).max(0) as u32
    }

    fn stage_index(&self, r: u32, year: i32) -> usize {
        (self.age(r, year) / 5).min(7) as usize
    }

    fn is_young(&self, r: u32, year: i32) -> bool {
        self.age(r, year) <= YOUNG_AGE
    }

    fn add_researcher(&mut self, debut: i32, lab: u32, institution: u32) -> u32 {
        let id = self.researchers.len() as u32;
        let sigma = self.cfg.organic.productivity_sigma;
        let productivity = if sigma > 0.0 {
            LogNormal::new(-sigma * sigma / 2.0, sigma)
                .expect("finite sigma")
                .sample(&mut self.rng)
        } else {
            1.0
        };
        self.researchers.push(Researcher {
            debut,
            lab,
            institution,
            active: true,
            mill_year: NEVER,
            prolific_year: NEVER,
            productivity,
        });
        id
    }

    /// A solo non-research record fixing a researcher's first publication year.
    fn add_debut_record(&mut self, r: u32, year: i32) {
        self.papers.push(Paper {
            year,
            doc_type: DocType::Other,
            journal: 0,
            authors: vec![r],
            unresolved: false,
            cites: Vec::new(),
        });
    }

    fn random_journals(&mut self) -> Vec<u16> {
        let o = &self.cfg.organic;
        rand::seq::index::sample(&mut self.rng, o.journals, o.journals_per_lab)
            .into_iter()
            .map(|j| j as u16)
            .collect()
    }

    fn link_partners(&mut self, lab: u32, count: usize) {
        let n = self.labs.len() as u32;
        if n < 2 {
            return;
        }
        for _ in 0..count {
            let other = self
                .size_biased_lab()
                .unwrap_or_else(|| self.rng.random_range(0..n));
            if other != lab && !self.labs[lab as usize].partners.contains(&other) {
                self.labs[lab as usize].partners.push(other);
                self.labs[other as usize].partners.push(lab);
            }
        }
    }

    /// Lab of a uniformly drawn lab member, so larger labs are likelier.
    fn size_biased_lab(&mut self) -> Option<u32> {
        for _ in 0..8 {
            let r = self.rng.random_range(0..self.researchers.len());
            let res = &self.researchers[r];
            if res.active && res.lab != NO_LAB {
                return Some(res.lab);
            }
        }
        None
    }

    fn open_lab(&mut self, pi: u32, institution: u32) -> u32 {
        let id = self.labs.len() as u32;
        let journals = self.random_journals();
        self.labs.push(Lab {
            pi,
            members: Vec::new(),
            institution,
            journals,
            partners: Vec::new(),
        });
        self.researchers[pi as usize].lab = id;
        id
    }

    fn setup(&mut self) -> Result<()> {
        let o = &self.cfg.organic;
        let m = &self.cfg.mill;
        let start = self.cfg.years.start;

        // Institutions spread over countries with a decaying weight.
        let weights: Vec<f64> = (0..o.countries.len())
            .map(|c| 1.0 / ((c + 1) as f64).powf(0.8))
            .collect();
        let by_weight = WeightedIndex::new(&weights).map_err(invalid)?;
        self.institutions_by_country = vec![Vec::new(); self.countries.len()];
        for i in 0..o.institutions {
            let c = by_weight.sample(&mut self.rng);
            self.institution_country.push(c);
            self.institutions_by_country[c].push(i as u32);
        }
        // Countries the draw missed, including those only the mill
        // introduces, get one institution each.
        for c in 0..self.countries.len() {
            if !self.institutions_by_country[c].is_empty() {
                continue;
            }
            let i = self.institution_country.len() as u32;
            self.institution_country.push(c);
            self.institutions_by_country[c].push(i);
        }

        let per_publisher = o.journals / o.publishers;
        self.mill_journals = (0..m.journal_weights.len())
            .map(|k| (m.target_publisher + k * o.publishers) as u16)
            .collect();
        debug_assert!(self.mill_journals.len() <= per_publisher);

        // Initial population with ages spread over [0, initial_max_age].
        let mut pi_candidates = Vec::new();
        for i in 0..o.initial_researchers {
            let age =
                (i as u64 * (o.initial_max_age as u64 + 1) / o.initial_researchers as u64) as u32;
            let r = self.add_researcher(start - age as i32, NO_LAB, 0);
            if age >= o.mentor_min_age && age <= o.mentor_max_age {
                pi_candidates.push(r);
            }
        }
        if pi_candidates.len() < o.initial_labs {
            return Err(Error::InvalidConfig(format!(
                "only {} initial researchers are old enough to lead the {} initial labs",
                pi_candidates.len(),
                o.initial_labs
            )));
        }
        pi_candidates.shuffle(&mut self.rng);
        for &pi in &pi_candidates[..o.initial_labs] {
            let institution = self.rng.random_range(0..o.institutions as u32);
            self.researchers[pi as usize].institution = institution;
            self.open_lab(pi, institution);
        }
        // Remaining researchers join labs: half uniformly, half in proportion
        // to current size.
        let mut assigned: Vec<u32> = Vec::new();
        let mut order: Vec<u32> = (0..self.researchers.len() as u32)
            .filter(|&r| self.researchers[r as usize].lab == NO_LAB)
            .collect();
        order.shuffle(&mut self.rng);
        for r in order {
            let lab = if assigned.is_empty() || self.rng.random_bool(0.5) {
                self.rng.random_range(0..self.labs.len())
            } else {
                let other = assigned[self.rng.random_range(0..assigned.len())];
                self.researchers[other as usize].lab as usize
            };
            assigned.push(r);
            self.researchers[r as usize].lab = lab as u32;
            self.researchers[r as usize].institution = self.labs[lab].institution;
            self.labs[lab].members.push(r);
        }
        for lab in 0..self.labs.len() as u32 {
            self.link_partners(lab, self.cfg.organic.partners_per_lab.div_ceil(2));
        }
        for r in 0..self.researchers.len() as u32 {
            let debut = self.researchers[r as usize].debut;
            self.add_debut_record(r, debut);
        }
        Ok(())
    }

    fn step(&mut self, year: i32) -> Result<()> {
        let has_mill = self.cfg.mill.customers_per_year.iter().any(|&c| c > 0);
        if has_mill && year == self.cfg.mill.start_year - 1 {
            self.create_foundation(year);
        }
        if year > self.cfg.years.start {
            self.churn(year);
        }
        self.recruit(year)?;
        let customers = self.choose_customers(year)?;
        self.choose_prolific(year);

        self.organic_papers(year);
        self.consortium_papers(year)?;
        self.large_collaborations(year);
        self.prolific_papers(year);
        self.mill_papers_for(year, &customers)?;
        self.organic_reviews(year);
        self.assign_mill_reviewers(year, &customers);
        self.heavy_reviews(year);
        Ok(())
    }

    fn create_foundation(&mut self, year: i32) {
        let n = self.cfg.mill.foundation_author_count;
        for _ in 0..n {
            let c = self.mill_country();
            let institution = *self.institutions_by_country[c]
                .choose(&mut self.rng)
                .expect("every country has an institution");
            let r = self.add_researcher(year, NO_LAB, institution);
            self.add_debut_record(r, year);
            self.foundation.push(r);
        }
    }

    fn mill_country(&mut self) -> usize {
        let weights = &self.cfg.mill.customer_countries;
        if weights.values().sum::<f64>() > 0.0 {
            let codes: Vec<&String> = weights.keys().collect();
            let dist = WeightedIndex::new(weights.values()).expect("validated weights");
            let code = codes[dist.sample(&mut self.rng)];
            self.countries
                .iter()
                .position(|c| c == code)
                .expect("registered country")
        } else {
            self.rng.random_range(0..self.cfg.organic.countries.len())
        }
    }

    /// Dropout, lab founding and member pruning.
    fn churn(&mut self, year: i32) {
        let o = &self.cfg.organic;
        for r in 0..self.researchers.len() {
            let res = &self.researchers[r];
            if res.active && res.lab != NO_LAB && self.rng.random_bool(o.dropout_rate) {
                self.researchers[r].active = false;
            }
        }
        let mut founders = Vec::new();
        for lab in &self.labs {
            for &m in &lab.members {
                let res = &self.researchers[m as usize];
                if res.active
                    && (year - res.debut) as u32 >= o.mentor_min_age
                    && self.rng.random_bool(o.lab_founding_rate)
                {
                    founders.push(m);
                }
            }
        }
        for founder in founders {
            let old = self.researchers[founder as usize].lab as usize;
            self.labs[old].members.retain(|&m| m != founder);
            let institution = self.researchers[founder as usize].institution;
            let lab = self.open_lab(founder, institution);
            self.link_partners(lab, self.cfg.organic.partners_per_lab.div_ceil(2));
        }
        let researchers = &self.researchers;
        for lab in &mut self.labs {
            lab.members.retain(|&m| researchers[m as usize].active);
        }
    }

    /// New researchers join labs whose PI is at mentoring age.
    fn recruit(&mut self, year: i32) -> Result<()> {
        let o = &self.cfg.organic;
        if year == self.cfg.years.start {
            return Ok(());
        }
        let open: Vec<u32> = (0..self.labs.len() as u32)
            .filter(|&l| {
                let pi = self.labs[l as usize].pi;
                let age = self.age(pi, year);
                self.researchers[pi as usize].active
                    && age >= o.mentor_min_age
                    && age <= o.mentor_max_age
            })
            .collect();
        if open.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no lab can take new researchers in {year}"
            )));
        }
        let weights: Vec<usize> = open
            .iter()
            .map(|&l| self.labs[l as usize].members.len() + 1)
            .collect();
        let dist = WeightedIndex::new(&weights).map_err(invalid)?;
        for _ in 0..o.new_researchers_per_year {
            let lab = open[dist.sample(&mut self.rng)];
            let institution = self.labs[lab as usize].institution;
            let r = self.add_researcher(year, lab, institution);
            self.labs[lab as usize].members.push(r);
        }
        Ok(())
    }

    fn young_lab_members(&self, year: i32, max_age: u32) -> Vec<u32> {
        self.labs
            .iter()
            .flat_map(|lab| lab.members.iter().copied())
            .filter(|&r| {
                let res = &self.researchers[r as usize];
                res.active
                    && res.mill_year < year - 1
                    && res.prolific_year != year
                    && self.age(r, year) <= max_age
            })
            .collect()
    }

    fn choose_customers(&mut self, year: i32) -> Result<Vec<u32>> {
        let m = &self.cfg.mill;
        let n = self.cfg.customers_in(year);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut customers = Vec::with_capacity(n);
        let previous = self
            .customers_by_year
            .get(&(year - 1))
            .cloned()
            .unwrap_or_default();
        for r in previous {
            if customers.len() < n && self.rng.random_bool(m.repeat_probability) {
                customers.push(r);
            }
        }
        let fresh_needed = n - customers.len();
        let existing = (fresh_needed as f64 * m.existing_customer_share).round() as usize;
        let mut pool = self.young_lab_members(year, YOUNG_AGE - 2);
        pool.shuffle(&mut self.rng);
        customers.extend(pool.into_iter().take(existing));
        while customers.len() < n {
            let c = self.mill_country();
            let institution = *self.institutions_by_country[c]
                .choose(&mut self.rng)
                .expect("every country has an institution");
            customers.push(self.add_researcher(year, NO_LAB, institution));
        }
        for &r in &customers {
            self.researchers[r as usize].mill_year = year;
            if !self.home_journal.contains_key(&r) {
                let j = self.mill_journal_index();
                self.home_journal.insert(r, j);
            }
        }
        customers.sort_unstable();
        self.customers_by_year.insert(year, customers.clone());
        Ok(customers)
    }

    fn mill_journal_index(&mut self) -> usize {
        let dist = WeightedIndex::new(&self.cfg.mill.journal_weights).expect("validated weights");
        dist.sample(&mut self.rng)
    }

    fn choose_prolific(&mut self, year: i32) {
        let n = self.cfg.organic.prolific_young_per_year;
        if n == 0 {
            return;
        }
        let mut pool = self.young_lab_members(year, YOUNG_AGE - 2);
        pool.retain(|&r| self.researchers[r as usize].mill_year == NEVER);
        pool.shuffle(&mut self.rng);
        pool.truncate(n);
        pool.sort_unstable();
        for &r in &pool {
            self.researchers[r as usize].prolific_year = year;
        }
        self.prolific.insert(year, pool);
    }

    fn push_paper(&mut self, year: i32, journal: u16, authors: Vec<u32>, organic: bool) -> u32 {
        let o = &self.cfg.organic;
        let (doc_type, unresolved) = if organic {
            let u: f64 = self.rng.random();
            let doc_type = if u < o.review_share {
                DocType::Review
            } else if u < o.review_share + o.other_share {
                DocType::Other
            } else {
                DocType::ResearchArticle
            };
            (doc_type, self.rng.random_bool(o.unresolved_author_rate))
        } else {
            (DocType::ResearchArticle, false)
        };
        let mut cites = Vec::new();
        if organic && doc_type == DocType::ResearchArticle && !self.citable.is_empty() {
            for _ in 0..poisson(&mut self.rng, o.citations_per_paper) {
                let c = *self.citable.choose(&mut self.rng).expect("non-empty");
                if !cites.contains(&c) {
                    cites.push(c);
                }
            }
        }
        let id = self.papers.len() as u32;
        self.papers.push(Paper {
            year,
            doc_type,
            journal,
            authors,
            unresolved,
            cites,
        });
        id
    }

    fn organic_papers(&mut self, year: i32) {
        let o = &self.cfg.organic;
        let team_extra = o.team_size_mean - 1.0;
        let available: Vec<Vec<u32>> = self
            .labs
            .iter()
            .map(|lab| {
                lab.members
                    .iter()
                    .copied()
                    .filter(|&m| {
                        let res = &self.researchers[m as usize];
                        res.active && res.prolific_year != year
                    })
                    .collect()
            })
            .collect();
        let pi_available = |world: &Self, pi: u32| {
            let res = &world.researchers[pi as usize];
            res.active && res.prolific_year != year
        };

        for r in 0..self.researchers.len() as u32 {
            let res = &self.researchers[r as usize];
            if !res.active || res.lab == NO_LAB || res.prolific_year == year {
                continue;
            }
            let lab = res.lab as usize;
            let productivity = self.researchers[r as usize].productivity;
            let mut rate = o.papers_per_researcher_by_stage[self.stage_index(r, year)];
            if self.labs[lab].pi == r {
                rate += o.pi_papers_per_member * available[lab].len() as f64;
            }
            let mut n = poisson(&mut self.rng, rate * productivity);
            if self.researchers[r as usize].debut == year {
                n = n.max(1);
            }
            for _ in 0..n {
                let k = (1 + poisson(&mut self.rng, team_extra)).min(MAX_AUTHORS);
                let mut authors = vec![r];
                let pi = self.labs[lab].pi;
                if k >= 2
                    && pi != r
                    && pi_available(self, pi)
                    && self.rng.random_bool(o.mentor_inclusion)
                {
                    authors.push(pi);
                }
                if authors.len() < k && self.rng.random_bool(o.cross_lab_probability) {
                    if let Some(&partner) = self.labs[lab].partners.choose(&mut self.rng) {
                        let other = self.labs[partner as usize].pi;
                        if pi_available(self, other) && !authors.contains(&other) {
                            authors.push(other);
                        }
                    }
                }
                let mates = &available[lab];
                let mut attempts = 0;
                while authors.len() < k && attempts < 3 * k && !mates.is_empty() {
                    attempts += 1;
                    let mate = mates[self.rng.random_range(0..mates.len())];
                    if !authors.contains(&mate) {
                        authors.push(mate);
                    }
                }
                let journal = *self.labs[lab]
                    .journals
                    .choose(&mut self.rng)
                    .expect("journals");
                self.push_paper(year, journal, authors, true);
            }
        }
    }

    /// Multi-lab papers among PIs, favouring large labs.
    fn consortium_papers(&mut self, year: i32) -> Result<()> {
        let o = &self.cfg.organic;
        if o.consortium_papers_per_year == 0 {
            return Ok(());
        }
        let labs: Vec<u32> = (0..self.labs.len() as u32)
            .filter(|&l| {
                let pi = &self.researchers[self.labs[l as usize].pi as usize];
                pi.active && pi.prolific_year != year
            })
            .collect();
        if labs.len() < o.consortium_max_labs {
            return Ok(());
        }
        let weights: Vec<usize> = labs
            .iter()
            .map(|&l| self.labs[l as usize].members.len() + 1)
            .collect();
        let dist = WeightedIndex::new(&weights).map_err(invalid)?;
        for _ in 0..o.consortium_papers_per_year {
            let n_labs = self
                .rng
                .random_range(o.consortium_min_labs..=o.consortium_max_labs);
            let mut chosen: Vec<u32> = Vec::with_capacity(n_labs);
            while chosen.len() < n_labs {
                let l = labs[dist.sample(&mut self.rng)];
                if !chosen.contains(&l) {
                    chosen.push(l);
                }
            }
            let mut authors = Vec::new();
            for &l in &chosen {
                let lab = &self.labs[l as usize];
                authors.push(lab.pi);
                if self.rng.random_bool(0.5) {
                    if let Some(&m) = lab.members.choose(&mut self.rng) {
                        let res = &self.researchers[m as usize];
                        if res.active && res.prolific_year != year && !authors.contains(&m) {
                            authors.push(m);
                        }
                    }
                }
            }
            let journal = *self.labs[chosen[0] as usize]
                .journals
                .choose(&mut self.rng)
                .expect("journals");
            self.push_paper(year, journal, authors, true);
        }
        Ok(())
    }

    /// Papers with more than 20 authors, drawn from the whole active population.
    fn large_collaborations(&mut self, year: i32) {
        let o = &self.cfg.organic;
        let organic_this_year = self
            .papers
            .iter()
            .rev()
            .take_while(|p| p.year == year)
            .count();
        let n = (organic_this_year as f64 * o.large_collaboration_rate).round() as usize;
        let active: Vec<u32> = (0..self.researchers.len() as u32)
            .filter(|&r| {
                let res = &self.researchers[r as usize];
                res.active && res.lab != NO_LAB && res.prolific_year != year
            })
            .collect();
        if active.len() < 40 {
            return;
        }
        for _ in 0..n {
            let size = self.rng.random_range(MAX_AUTHORS + 1..=2 * MAX_AUTHORS);
            let authors: Vec<u32> = rand::seq::index::sample(&mut self.rng, active.len(), size)
                .into_iter()
                .map(|i| active[i])
                .collect();
            let journal = self.rng.random_range(0..o.journals) as u16;
            self.push_paper(year, journal, authors, true);
        }
    }

    fn prolific_papers(&mut self, year: i32) {
        let o = &self.cfg.organic;
        let Some(chosen) = self.prolific.get(&year).cloned() else {
            return;
        };
        let partners = self.young_lab_members(year, YOUNG_AGE);
        if partners.is_empty() {
            return;
        }
        for r in chosen {
            let lab = self.researchers[r as usize].lab as usize;
            let n = self
                .rng
                .random_range(o.prolific_min_papers..=o.prolific_max_papers);
            for _ in 0..n {
                let k = self.rng.random_range(1..=2);
                let mut authors = vec![r];
                let mut attempts = 0;
                while authors.len() <= k && attempts < 10 {
                    attempts += 1;
                    let p = partners[self.rng.random_range(0..partners.len())];
                    if !authors.contains(&p) && self.researchers[p as usize].lab as usize != lab {
                        authors.push(p);
                    }
                }
                let journal = *self.labs[lab]
                    .journals
                    .choose(&mut self.rng)
                    .expect("journals");
                // Research articles only, so the burst counts toward eligibility.
                let id = self.papers.len() as u32;
                self.papers.push(Paper {
                    year,
                    doc_type: DocType::ResearchArticle,
                    journal,
                    authors,
                    unresolved: false,
                    cites: Vec::new(),
                });
                debug_assert_eq!(id as usize + 1, self.papers.len());
            }
        }
    }

    fn mill_papers_for(&mut self, year: i32, customers: &[u32]) -> Result<()> {
        if customers.is_empty() {
            return Ok(());
        }
        let m = &self.cfg.mill;
        let n_journals = self.mill_journals.len();
        let journal_dist = WeightedIndex::new(&m.journal_weights).map_err(invalid)?;
        let mut queues: Vec<SlotQueue> = (0..n_journals).map(|_| SlotQueue::default()).collect();

        let mut customer_slots = 0;
        for &r in customers {
            let quota = m.papers_per_customer_min
                + poisson(&mut self.rng, m.papers_per_customer_extra_mean);
            customer_slots += quota;
            let home = self.home_journal[&r];
            for _ in 0..quota {
                let j = if self.rng.random_bool(m.venue_focus) {
                    home
                } else {
                    journal_dist.sample(&mut self.rng)
                };
                queues[j].customers.push_back(r);
            }
        }

        let mut casual_slots =
            (customer_slots as f64 * m.casual_share / (1.0 - m.casual_share)).round() as usize;
        let mut pool = self.young_lab_members(year, YOUNG_AGE);
        pool.shuffle(&mut self.rng);
        for r in pool {
            if casual_slots == 0 {
                break;
            }
            let n = self
                .rng
                .random_range(1..=m.casual_papers_max)
                .min(casual_slots);
            casual_slots -= n;
            self.researchers[r as usize].mill_year = year;
            self.casual.insert(r);
            let j = journal_dist.sample(&mut self.rng);
            for _ in 0..n {
                queues[j].casual.push_back(r);
            }
        }

        for queue in &mut queues {
            queue.customers.make_contiguous().shuffle(&mut self.rng);
            queue.casual.make_contiguous().shuffle(&mut self.rng);
        }

        let foundation_by_journal: Vec<Vec<u32>> = (0..n_journals)
            .map(|j| {
                self.foundation
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % n_journals == j)
                    .map(|(_, &r)| r)
                    .collect()
            })
            .collect();

        for (j, mut queue) in queues.into_iter().enumerate() {
            while !queue.customers.is_empty() {
                let k = (2 + poisson(&mut self.rng, m.authors_per_mill_paper_mean - 2.0))
                    .min(MAX_AUTHORS);
                let mut authors: Vec<u32> = foundation_by_journal[j]
                    .iter()
                    .copied()
                    .filter(|_| self.rng.random_bool(m.foundation_reuse_probability))
                    .collect();
                authors.truncate(k - 1);
                // The first bought slot is always a customer's.
                let mut rejected = Vec::new();
                let mut need_customer = true;
                let mut attempts = 0;
                while (authors.len() < k || need_customer) && attempts < 4 * k {
                    attempts += 1;
                    let (c, a) = (queue.customers.len(), queue.casual.len());
                    if c + a == 0 || (need_customer && c == 0) {
                        break;
                    }
                    let from_customers = need_customer || self.rng.random_range(0..c + a) < c;
                    let next = if from_customers {
                        queue.customers.pop_front()
                    } else {
                        queue.casual.pop_front()
                    };
                    let Some(r) = next else { break };
                    if authors.contains(&r) {
                        rejected.push((r, from_customers));
                        continue;
                    }
                    if from_customers {
                        need_customer = false;
                    }
                    authors.push(r);
                }
                for (r, from_customers) in rejected {
                    if from_customers {
                        queue.customers.push_back(r);
                    } else {
                        queue.casual.push_back(r);
                    }
                }
                if need_customer {
                    // Only repeated slots of researchers already on this paper remain.
                    break;
                }
                authors.shuffle(&mut self.rng);
                let id = self.push_paper(year, self.mill_journals[j], authors, false);
                self.mill_papers.push(id);
            }
            // Leftover casual slots join the journal's last paper when possible.
            if let Some(&last) = self.mill_papers.last() {
                let paper = &mut self.papers[last as usize];
                if paper.year == year && paper.journal == self.mill_journals[j] {
                    for r in queue.casual {
                        if paper.authors.len() < MAX_AUTHORS && !paper.authors.contains(&r) {
                            paper.authors.push(r);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn add_reviews(&mut self, r: u32, year: i32, journal: u16, count: usize) {
        if count > 0 {
            *self.reviews.entry((r, year, journal)).or_insert(0) += count as u64;
        }
    }

    fn organic_reviews(&mut self, year: i32) {
        let rc = &self.cfg.reviews;
        for r in 0..self.researchers.len() as u32 {
            let res = &self.researchers[r as usize];
            if !res.active || res.lab == NO_LAB {
                continue;
            }
            let (share, mean) = if self.is_young(r, year) {
                (rc.young_reviewer_share, rc.young_reviews_mean)
            } else {
                (rc.senior_reviewer_share, rc.senior_reviews_mean)
            };
            if self.rng.random_bool(share) {
                let lab = res.lab as usize;
                let journal = *self.labs[lab]
                    .journals
                    .choose(&mut self.rng)
                    .expect("journals");
                let count = poisson(&mut self.rng, mean);
                self.add_reviews(r, year, journal, count);
            }
        }
        let mut pool = self.young_lab_members(year, 4);
        pool.shuffle(&mut self.rng);
        for r in pool.into_iter().take(rc.heavy_young_per_year) {
            self.heavy_reviewers.push((r, year, year + 2, false));
        }
    }

    fn assign_mill_reviewers(&mut self, year: i32, customers: &[u32]) {
        let m = &self.cfg.mill;
        let mill_years = self
            .cfg
            .years
            .years()
            .filter(|&y| self.cfg.customers_in(y) > 0)
            .count();
        if customers.is_empty() || mill_years == 0 {
            return;
        }
        let per_year = m.mill_reviewer_count.div_ceil(mill_years);
        let mut pool: Vec<u32> = customers
            .iter()
            .copied()
            .chain(
                self.casual
                    .iter()
                    .copied()
                    .filter(|&r| self.researchers[r as usize].mill_year == year),
            )
            .filter(|r| !self.mill_reviewers.contains(r))
            .collect();
        pool.sort_unstable();
        pool.dedup();
        pool.shuffle(&mut self.rng);
        let remaining = m.mill_reviewer_count - self.mill_reviewers.len();
        for r in pool.into_iter().take(per_year.min(remaining)) {
            self.mill_reviewers.insert(r);
            self.heavy_reviewers.push((r, year, year + 2, true));
        }
    }

    fn heavy_reviews(&mut self, year: i32) {
        let heavy: Vec<(u32, bool)> = self
            .heavy_reviewers
            .iter()
            .filter(|&&(_, from, to, _)| from <= year && year <= to)
            .map(|&(r, _, _, mill)| (r, mill))
            .collect();
        for (r, mill) in heavy {
            let (journal, mean) = if mill {
                let j = self.mill_journal_index();
                (self.mill_journals[j], self.cfg.mill.mill_reviews_per_year)
            } else {
                let lab = self.researchers[r as usize].lab as usize;
                let j = *self.labs[lab]
                    .journals
                    .choose(&mut self.rng)
                    .expect("journals");
                (j, self.cfg.reviews.heavy_reviews_mean)
            };
            let count = poisson(&mut self.rng, mean);
            self.add_reviews(r, year, journal, count);
        }
    }

    /// Each mill paper receives citations from same-year or later papers,
    /// mostly from other mill papers.
    fn cite_mill_papers(&mut self) {
        let m = &self.cfg.mill;
        let organic: Vec<u32> = {
            let mill: BTreeSet<u32> = self.mill_papers.iter().copied().collect();
            (0..self.papers.len() as u32)
                .filter(|p| {
                    let paper = &self.papers[*p as usize];
                    paper.doc_type == DocType::ResearchArticle
                        && paper.authors.len() > 1
                        && !mill.contains(p)
                })
                .collect()
        };
        let mills = self.mill_papers.clone();
        let first_from = |list: &[u32], papers: &[Paper], year: i32| {
            list.partition_point(|&p| papers[p as usize].year < year)
        };
        for &target in &mills {
            let year = self.papers[target as usize].year;
            let mill_from = first_from(&mills, &self.papers, year);
            let organic_from = first_from(&organic, &self.papers, year);
            for _ in 0..poisson(&mut self.rng, m.citations_per_mill_paper) {
                let (pool, from) = if self.rng.random_bool(m.intra_mill_citation_probability) {
                    (&mills, mill_from)
                } else {
                    (&organic, organic_from)
                };
                let candidates = &pool[from..];
                if candidates.len() < 2 {
                    continue;
                }
                let source = loop {
                    let s = candidates[self.rng.random_range(0..candidates.len())];
                    if s != target {
                        break s;
                    }
                };
                let cites = &mut self.papers[source as usize].cites;
                if !cites.contains(&target) {
                    cites.push(target);
                }
            }
        }
    }

    fn researcher_id(r: u32) -> String {
        format!("R{r:06}")
    }

    fn pub_id(p: u32) -> String {
        format!("P{p:07}")
    }

    fn finish(mut self) -> Result<SynthOutput> {
        let o = &self.cfg.organic;
        let cfg = self.cfg;
        let journal_id = |j: u16| format!("J{j:03}");
        let publisher_id = |j: u16| format!("PB{:02}", j as usize % o.publishers);

        let mut records = Vec::with_capacity(self.papers.len());
        for (i, paper) in self.papers.iter().enumerate() {
            let mut authorships: Vec<Authorship> = paper
                .authors
                .iter()
                .map(|&r| {
                    let institution = self.researchers[r as usize].institution;
                    Authorship {
                        researcher_id: Some(Self::researcher_id(r)),
                        institution_id: Some(format!("I{institution:04}")),
                        country_code: Some(
                            self.countries[self.institution_country[institution as usize]].clone(),
                        ),
                    }
                })
                .collect();
            if paper.unresolved {
                authorships.push(Authorship::default());
            }
            records.push(PublicationRecord {
                pub_id: Self::pub_id(i as u32),
                year: paper.year,
                doc_type: paper.doc_type,
                journal_id: journal_id(paper.journal),
                publisher_id: publisher_id(paper.journal),
                authorships,
                cited_pub_ids: (!paper.cites.is_empty())
                    .then(|| paper.cites.iter().map(|&c| Self::pub_id(c)).collect()),
            });
        }

        let flagged: Vec<String> = {
            let mut flagged: Vec<String> = Vec::new();
            for &p in &self.mill_papers {
                if self.rng.random_bool(cfg.flags.fraction) {
                    flagged.push(Self::pub_id(p));
                }
            }
            if flagged.is_empty() && cfg.flags.fraction > 0.0 {
                if let Some(&p) = self.mill_papers.choose(&mut self.rng) {
                    flagged.push(Self::pub_id(p));
                }
            }
            flagged
        };
        let flags = if flagged.is_empty() {
            None
        } else {
            Some(FlagList::new(
                format!("{}:{}", cfg.flags.name, FlagType::TorturedPhrase),
                FlagType::TorturedPhrase,
                flagged,
            )?)
        };

        let reviews = self
            .reviews
            .iter()
            .map(|(&(r, year, journal), &count)| PeerReviewRecord {
                researcher_id: Self::researcher_id(r),
                year,
                journal_id: Some(journal_id(journal)),
                review_count: count,
            })
            .collect();

        let ids = |set: &mut dyn Iterator<Item = u32>| -> BTreeSet<String> {
            set.map(Self::researcher_id).collect()
        };
        let customers: BTreeSet<u32> = self.customers_by_year.values().flatten().copied().collect();
        let truth = GroundTruth {
            mill_researchers: ids(&mut customers.iter().chain(&self.foundation).copied()),
            mill_papers: self.mill_papers.iter().map(|&p| Self::pub_id(p)).collect(),
            foundation_authors: ids(&mut self.foundation.iter().copied()),
            mill_reviewers: ids(&mut self.mill_reviewers.iter().copied()),
            casual_buyers: ids(&mut self
                .casual
                .iter()
                .copied()
                .filter(|r| !customers.contains(r))),
            customers_by_year: self
                .customers_by_year
                .iter()
                .map(|(&y, rs)| (y, ids(&mut rs.iter().copied())))
                .collect(),
            prolific_organic: self
                .prolific
                .iter()
                .map(|(&y, rs)| (y, ids(&mut rs.iter().copied())))
                .collect(),
        };

        let corpus = Corpus::from_records(records)?;
        Ok(SynthOutput {
            corpus,
            truth,
            flags,
            reviews,
        })
    }
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(e.to_string())
}
