use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{Authorship, Corpus, DocType, FlagList, FlagType, PeerReviewRecord, PublicationRecord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    /// One JSON object per publication.
    Jsonl,
    /// One row per authorship.
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(InputFormat::Jsonl),
            "csv" => Some(InputFormat::Csv),
            _ => None,
        }
    }
}

/// Reads publications from a JSONL stream. Blank lines are skipped.
pub fn read_jsonl_publications<R: BufRead>(reader: R) -> Result<Vec<PublicationRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PublicationRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Deserialize)]
struct AuthorshipRow {
    pub_id: String,
    year: i32,
    doc_type: DocType,
    journal_id: String,
    publisher_id: String,
    author_position: u32,
    #[serde(default)]
    researcher_id: Option<String>,
    #[serde(default)]
    institution_id: Option<String>,
    #[serde(default)]
    country: Option<String>,
    /// Semicolon-separated; must repeat identically on every row of a paper.
    #[serde(default)]
    cited_pub_ids: Option<String>,
}

fn non_empty(value: Option<String>) -> Option<String> {
    value.filter(|s| !s.trim().is_empty())
}

fn csv_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(line, format!("{kind:?}")),
    }
}

/// Reads publications from a CSV with one row per authorship.
///
/// Columns: `pub_id, year, doc_type, journal_id, publisher_id,
/// author_position, researcher_id, institution_id, country, cited_pub_ids`.
/// Rows of a paper may appear anywhere in the file; authors are ordered by
/// `author_position`.
pub fn read_csv_publications<R: Read>(reader: R) -> Result<Vec<PublicationRecord>> {
    struct Pending {
        line: u64,
        record: PublicationRecord,
        cited: Option<String>,
        positions: BTreeMap<u32, Authorship>,
    }

    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut pending: BTreeMap<String, Pending> = BTreeMap::new();
    for row in rdr.records() {
        let raw = row.map_err(csv_error)?;
        let line = csv_line(&raw);
        let row: AuthorshipRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let cited = non_empty(row.cited_pub_ids);
        let authorship = Authorship {
            researcher_id: non_empty(row.researcher_id),
            institution_id: non_empty(row.institution_id),
            country_code: non_empty(row.country),
        };
        let entry = pending
            .entry(row.pub_id.clone())
            .or_insert_with(|| Pending {
                line,
                record: PublicationRecord {
                    pub_id: row.pub_id.clone(),
                    year: row.year,
                    doc_type: row.doc_type,
                    journal_id: row.journal_id.clone(),
                    publisher_id: row.publisher_id.clone(),
                    authorships: Vec::new(),
                    cited_pub_ids: None,
                },
                cited: cited.clone(),
                positions: BTreeMap::new(),
            });
        let r = &entry.record;
        if r.year != row.year
            || r.doc_type != row.doc_type
            || r.journal_id != row.journal_id
            || r.publisher_id != row.publisher_id
            || entry.cited != cited
        {
            return Err(Error::parse(
                line,
                format!(
                    "publication fields of `{}` disagree with line {}",
                    row.pub_id, entry.line
                ),
            ));
        }
        if entry
            .positions
            .insert(row.author_position, authorship)
            .is_some()
        {
            return Err(Error::parse(
                line,
                format!(
                    "author position {} repeated for `{}`",
                    row.author_position, row.pub_id
                ),
            ));
        }
    }

    Ok(pending
        .into_values()
        .map(|mut p| {
            p.record.authorships = p.positions.into_values().collect();
            p.record.cited_pub_ids = p.cited.map(|s| {
                s.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            });
            p.record
        })
        .collect())
}

/// Loads a corpus from a `.jsonl` or `.csv` file.
pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let format = InputFormat::from_path(path).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "cannot infer corpus format from `{}` (expected .jsonl or .csv)",
            path.display()
        ))
    })?;
    let file = File::open(path)?;
    let records = match format {
        InputFormat::Jsonl => read_jsonl_publications(BufReader::new(file))?,
        InputFormat::Csv => read_csv_publications(file)?,
    };
    Corpus::from_records(records)
}

/// Writes the corpus as JSONL in pub_id order.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for record in corpus.publications() {
        serde_json::to_writer(&mut writer, record)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct FlagRow {
    pub_id: String,
    flag_type: String,
}

/// Reads a `pub_id, flag_type` CSV into one list per flag type, named
/// `<prefix>:<flag_type>`.
pub fn read_flag_lists<R: Read>(reader: R, prefix: &str) -> Result<Vec<FlagList>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut grouped: BTreeMap<FlagType, BTreeSet<String>> = BTreeMap::new();
    for row in rdr.records() {
        let raw = row.map_err(csv_error)?;
        let line = csv_line(&raw);
        let row: FlagRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let flag_type: FlagType = row
            .flag_type
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        if row.pub_id.is_empty() {
            return Err(Error::parse(line, "empty pub_id"));
        }
        grouped.entry(flag_type).or_default().insert(row.pub_id);
    }
    grouped
        .into_iter()
        .map(|(flag_type, ids)| FlagList::new(format!("{prefix}:{flag_type}"), flag_type, ids))
        .collect()
}

pub fn write_flag_list<W: Write>(list: Option<&FlagList>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["pub_id", "flag_type"])
        .map_err(csv_error)?;
    if let Some(list) = list {
        for id in list.pub_ids() {
            wtr.write_record([id.as_str(), list.flag_type().as_str()])
                .map_err(csv_error)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `researcher_id, year, journal_id, review_count` rows.
pub fn read_peer_reviews<R: Read>(reader: R) -> Result<Vec<PeerReviewRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let mut out = Vec::new();
    for row in rdr.records() {
        let raw = row.map_err(csv_error)?;
        let line = csv_line(&raw);
        let mut record: PeerReviewRecord = raw
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(line, e.to_string()))?;
        record.journal_id = non_empty(record.journal_id);
        if record.researcher_id.is_empty() {
            return Err(Error::parse(line, "empty researcher_id"));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_peer_reviews<W: Write>(reviews: &[PeerReviewRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["researcher_id", "year", "journal_id", "review_count"])
        .map_err(csv_error)?;
    for r in reviews {
        wtr.write_record([
            r.researcher_id.as_str(),
            &r.year.to_string(),
            r.journal_id.as_deref().unwrap_or(""),
            &r.review_count.to_string(),
        ])
        .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const JSONL: &str = r#"{"pub_id":"p2","year":2021,"doc_type":"research_article","journal_id":"J1","publisher_id":"PUB1","authors":[{"researcher_id":"a","country":"GB"},{"researcher_id":"b"}]}

{"pub_id":"p1","year":2020,"doc_type":"review","journal_id":"J2","publisher_id":"PUB1","authors":[{"researcher_id":"a","institution_id":"I1"},{}],"cited_pub_ids":["p0"]}
"#;

    #[test]
    fn jsonl_round_trip() {
        let records = read_jsonl_publications(JSONL.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].authorships[1], Authorship::default());
        let corpus = Corpus::from_records(records).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        let again = Corpus::from_records(read_jsonl_publications(&buf[..]).unwrap()).unwrap();
        assert_eq!(again.publications(), corpus.publications());
    }

    #[test]
    fn malformed_jsonl_reports_line() {
        let text = format!("{}\n{{\"pub_id\": 3}}\n", JSONL.lines().next().unwrap());
        match read_jsonl_publications(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_rows_group_by_paper_and_position() {
        let text = "\
pub_id,year,doc_type,journal_id,publisher_id,author_position,researcher_id,institution_id,country,cited_pub_ids
p1,2020,research_article,J1,PUB1,2,b,,,x;y
p2,2020,research_article,J1,PUB1,1,c,I9,FR,
p1,2020,research_article,J1,PUB1,1,a,I1,GB,x;y
p1,2020,research_article,J1,PUB1,3,,,,x;y
";
        let records = read_csv_publications(text.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        let p1 = &records[0];
        assert_eq!(p1.pub_id, "p1");
        let ids: Vec<_> = p1
            .authorships
            .iter()
            .map(|a| a.researcher_id.clone())
            .collect();
        assert_eq!(ids, vec![Some("a".into()), Some("b".into()), None]);
        assert_eq!(p1.cited_pub_ids, Some(vec!["x".into(), "y".into()]));
        assert_eq!(
            records[1].authorships[0].country_code.as_deref(),
            Some("FR")
        );
    }

    #[test]
    fn csv_conflicting_rows_report_line() {
        let text = "\
pub_id,year,doc_type,journal_id,publisher_id,author_position,researcher_id,institution_id,country,cited_pub_ids
p1,2020,research_article,J1,PUB1,1,a,,,
p1,2021,research_article,J1,PUB1,2,b,,,
";
        match read_csv_publications(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_bad_year_reports_line() {
        let text = "\
pub_id,year,doc_type,journal_id,publisher_id,author_position,researcher_id,institution_id,country,cited_pub_ids
p1,twenty,research_article,J1,PUB1,1,a,,,
";
        assert!(matches!(
            read_csv_publications(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn flag_lists_grouped_by_type() {
        let text = "pub_id,flag_type\np1,tortured_phrase\np2,clay_feet\np3,tortured_phrase\n";
        let lists = read_flag_lists(text.as_bytes(), "pps").unwrap();
        assert_eq!(lists.len(), 2);
        assert_eq!(lists[0].flag_type(), FlagType::TorturedPhrase);
        assert_eq!(lists[0].pub_ids().len(), 2);
        assert_eq!(lists[1].name(), "pps:clay_feet");
        assert!(read_flag_lists("pub_id,flag_type\np1,bogus\n".as_bytes(), "x").is_err());
    }

    #[test]
    fn peer_reviews_round_trip() {
        let text = "researcher_id,year,journal_id,review_count\nr1,2020,,12\nr2,2021,J3,300\n";
        let reviews = read_peer_reviews(text.as_bytes()).unwrap();
        assert_eq!(reviews[0].journal_id, None);
        assert_eq!(reviews[1].review_count, 300);
        let mut out = Vec::new();
        write_peer_reviews(&reviews, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
        assert!(read_peer_reviews(
            "researcher_id,year,journal_id,review_count\nr1,2020,,-3\n".as_bytes()
        )
        .is_err());
    }
}
