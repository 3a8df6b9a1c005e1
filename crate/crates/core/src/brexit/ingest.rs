use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::geo::GeoVoter;
use crate::{Error, Result};

/// Ingestion aborts when more than this share of rows is malformed.
pub const MAX_MALFORMED_FRACTION: f64 = 0.05;

/// One region's vote counts and location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRecord {
    pub region_id: String,
    pub leave_count: u64,
    pub remain_count: u64,
    pub lat: f64,
    pub lon: f64,
    /// No town matched; the location is the centroid of located regions.
    pub imputed: bool,
}

impl RegionRecord {
    pub fn total(&self) -> u64 {
        self.leave_count + self.remain_count
    }
}

/// How much of the vote table could be placed on the map.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Coverage {
    pub regions: usize,
    pub located: usize,
    pub imputed: usize,
    pub imputed_fraction: f64,
    /// Town rows whose region is absent from the vote table.
    pub unmatched_towns: usize,
    pub malformed_rows: usize,
    pub total_rows: usize,
    /// `file:line: message` for every skipped row.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestReport {
    pub records: Vec<RegionRecord>,
    pub coverage: Coverage,
}

fn header_index(headers: &csv::StringRecord, file: &str, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Ingest {
                    message: format!("{file}: missing column `{name}`"),
                    rows: Vec::new(),
                })
        })
        .collect()
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn parse_votes(
    rec: &csv::StringRecord,
    cols: &[usize],
) -> std::result::Result<(String, u64, u64), String> {
    let field = |i: usize| rec.get(cols[i]).ok_or_else(|| "too few fields".to_string());
    let region = field(0)?.to_string();
    if region.is_empty() {
        return Err("empty region".into());
    }
    let count = |i: usize, name: &str| {
        field(i)?.parse::<u64>().map_err(|_| {
            format!(
                "{name} `{}` is not a non-negative integer",
                rec.get(cols[i]).unwrap_or("")
            )
        })
    };
    let (leave, remain) = (count(1, "leave")?, count(2, "remain")?);
    if leave == 0 && remain == 0 {
        return Err("both counts are zero".into());
    }
    Ok((region, leave, remain))
}

fn parse_town(
    rec: &csv::StringRecord,
    cols: &[usize],
) -> std::result::Result<(String, f64, f64), String> {
    let field = |i: usize| rec.get(cols[i]).ok_or_else(|| "too few fields".to_string());
    let region = field(0)?.to_string();
    let lat: f64 = field(1)?
        .parse()
        .map_err(|_| format!("lat `{}` is not a number", field(1).unwrap_or("")))?;
    let lon: f64 = field(2)?
        .parse()
        .map_err(|_| format!("lon `{}` is not a number", field(2).unwrap_or("")))?;
    GeoVoter::new(0, lat, lon).map_err(|e| e.to_string())?;
    Ok((region, lat, lon))
}

/// Reads `region,leave,remain` and `town,region,lat,lon` tables.
///
/// A region's location is the mean of its towns' coordinates; regions with
/// no town get the mean of all located regions. Malformed rows are skipped
/// and listed, unless they exceed [`MAX_MALFORMED_FRACTION`] of all rows.
pub fn ingest_readers(votes: impl Read, locations: impl Read) -> Result<IngestReport> {
    let mut coverage = Coverage::default();

    let mut rd = reader(votes);
    let cols = header_index(rd.headers()?, "votes", &["region", "leave", "remain"])?;
    let mut regions: Vec<(String, u64, u64)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, rec) in rd.records().enumerate() {
        coverage.total_rows += 1;
        let parsed = rec
            .map_err(|e| e.to_string())
            .and_then(|r| parse_votes(&r, &cols))
            .and_then(|row| {
                if seen.contains_key(&row.0) {
                    Err(format!("duplicate region `{}`", row.0))
                } else {
                    Ok(row)
                }
            });
        match parsed {
            Ok(row) => {
                seen.insert(row.0.clone(), regions.len());
                regions.push(row);
            }
            Err(msg) => coverage.errors.push(format!("votes:{}: {msg}", i + 2)),
        }
    }

    let mut rd = reader(locations);
    let cols = header_index(rd.headers()?, "locations", &["region", "lat", "lon"])?;
    let mut sums: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for (i, rec) in rd.records().enumerate() {
        coverage.total_rows += 1;
        match rec
            .map_err(|e| e.to_string())
            .and_then(|r| parse_town(&r, &cols))
        {
            Ok((region, lat, lon)) => match seen.get(&region) {
                Some(&idx) => {
                    let e = sums.entry(idx).or_insert((0.0, 0.0, 0));
                    e.0 += lat;
                    e.1 += lon;
                    e.2 += 1;
                }
                None => coverage.unmatched_towns += 1,
            },
            Err(msg) => coverage.errors.push(format!("locations:{}: {msg}", i + 2)),
        }
    }

    coverage.malformed_rows = coverage.errors.len();
    if coverage.total_rows > 0
        && coverage.malformed_rows as f64 > MAX_MALFORMED_FRACTION * coverage.total_rows as f64
    {
        return Err(Error::Ingest {
            message: format!(
                "{} of {} rows malformed (limit {:.0}%)",
                coverage.malformed_rows,
                coverage.total_rows,
                100.0 * MAX_MALFORMED_FRACTION
            ),
            rows: coverage.errors,
        });
    }
    if regions.is_empty() {
        return Err(Error::Ingest {
            message: "votes table has no usable rows".into(),
            rows: coverage.errors,
        });
    }
    if sums.is_empty() {
        return Err(Error::Ingest {
            message: "no region could be located".into(),
            rows: coverage.errors,
        });
    }

    let centroids: BTreeMap<usize, (f64, f64)> = sums
        .into_iter()
        .map(|(i, (la, lo, c))| (i, (la / c as f64, lo / c as f64)))
        .collect();
    let located = centroids.len() as f64;
    let global = centroids
        .values()
        .fold((0.0, 0.0), |acc, &(la, lo)| (acc.0 + la, acc.1 + lo));
    let global = (global.0 / located, global.1 / located);

    let records: Vec<RegionRecord> = regions
        .into_iter()
        .enumerate()
        .map(|(i, (region_id, leave, remain))| {
            let (lat, lon, imputed) = match centroids.get(&i) {
                Some(&(la, lo)) => (la, lo, false),
                None => (global.0, global.1, true),
            };
            RegionRecord {
                region_id,
                leave_count: leave,
                remain_count: remain,
                lat,
                lon,
                imputed,
            }
        })
        .collect();
    coverage.regions = records.len();
    coverage.imputed = records.iter().filter(|r| r.imputed).count();
    coverage.located = coverage.regions - coverage.imputed;
    coverage.imputed_fraction = coverage.imputed as f64 / coverage.regions as f64;
    Ok(IngestReport { records, coverage })
}

/// [`ingest_readers`] on two files.
pub fn ingest(
    votes_csv: impl AsRef<Path>,
    locations_csv: impl AsRef<Path>,
) -> Result<IngestReport> {
    ingest_readers(open(votes_csv.as_ref())?, open(locations_csv.as_ref())?)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Ingest {
        message: format!("cannot open {}: {e}", path.display()),
        rows: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroids_and_imputation() {
        let votes = "region,leave,remain\nA,10,5\nB,3,4\n\"C, east\",1,0\n";
        let towns = "town,region,lat,lon\nt1,A,0,0\nt2,A,2,2\nt3,B,4,6\nt4,Z,1,1\n";
        let r = ingest_readers(votes.as_bytes(), towns.as_bytes()).unwrap();
        assert_eq!(r.records.len(), 3);
        assert_eq!((r.records[0].lat, r.records[0].lon), (1.0, 1.0));
        let c = &r.records[2];
        assert_eq!(c.region_id, "C, east");
        assert!(c.imputed);
        assert_eq!((c.lat, c.lon), (2.5, 3.5));
        assert_eq!(r.coverage.imputed, 1);
        assert_eq!(r.coverage.unmatched_towns, 1);
        assert!((r.coverage.imputed_fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_votes_is_an_error() {
        let towns = "town,region,lat,lon\nt1,A,0,0\n";
        assert!(matches!(
            ingest_readers("region,leave,remain\n".as_bytes(), towns.as_bytes()),
            Err(Error::Ingest { .. })
        ));
        assert!(ingest_readers("".as_bytes(), towns.as_bytes()).is_err());
    }

    #[test]
    fn malformed_rows_are_listed_or_abort() {
        let mut votes = String::from("region,leave,remain\n");
        for i in 0..30 {
            votes.push_str(&format!("R{i},{},{}\n", 10 + i, 5 + i));
        }
        let mut towns = String::from("town,region,lat,lon\n");
        for i in 0..30 {
            towns.push_str(&format!("t{i},R{i},51.{i},-1.{i}\n"));
        }
        let one_bad = format!("{votes}X,ten,3\n");
        let r = ingest_readers(one_bad.as_bytes(), towns.as_bytes()).unwrap();
        assert_eq!(r.coverage.malformed_rows, 1);
        assert!(
            r.coverage.errors[0].starts_with("votes:32:"),
            "{:?}",
            r.coverage.errors
        );

        let many_bad = format!("{votes}X,ten,3\nY,-1,3\nZ,0,0\nR0,1,1\n");
        match ingest_readers(many_bad.as_bytes(), towns.as_bytes()) {
            Err(Error::Ingest { rows, .. }) => assert_eq!(rows.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_columns() {
        let r = ingest_readers(
            "region,leave\nA,1\n".as_bytes(),
            "town,region,lat,lon\n".as_bytes(),
        );
        assert!(matches!(r, Err(Error::Ingest { .. })));
    }
}
