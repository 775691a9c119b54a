//! Append-only class-number cache: one `key:value` record per line, last writer wins.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use biquad_core::params::QuadFieldSource;
use biquad_core::quadfield::{discriminant_of, quad_field_data, AbelianType, FundamentalUnit, QuadFieldData};
use biquad_core::Result;
use num_bigint::BigInt;
use rand::seq::index::sample;

fn join<T: ToString>(xs: &[T]) -> String {
    if xs.is_empty() {
        "-".into()
    } else {
        xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
    }
}

fn split_list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    if v == "-" {
        return Some(Vec::new());
    }
    v.split(',').map(|x| x.parse().ok()).collect()
}

pub fn format_record(q: &QuadFieldData) -> String {
    let mut s = format!("radicand:{} h:{} h2:{}", q.radicand, q.h, q.h2);
    if let Some(c) = &q.cl2 {
        s += &format!(" cl2:{}", join(&c.exponents));
    }
    if let Some(st) = &q.structure {
        s += &format!(" structure:{}", join(st));
    }
    if let Some(hp) = q.h_plus {
        s += &format!(" h_plus:{hp}");
    }
    if let Some(u) = &q.unit {
        s += &format!(" unit_x:{} unit_y:{} unit_denom:{} unit_norm:{}", u.x_num, u.y_num, u.denom, u.norm);
    }
    s
}

pub fn parse_record(line: &str) -> Option<QuadFieldData> {
    let kv: HashMap<&str, &str> = line.split_whitespace().filter_map(|p| p.split_once(':')).collect();
    let radicand: i64 = kv.get("radicand")?.parse().ok()?;
    let unit = match (kv.get("unit_x"), kv.get("unit_y"), kv.get("unit_denom"), kv.get("unit_norm")) {
        (Some(x), Some(y), Some(d), Some(n)) => Some(FundamentalUnit {
            x_num: x.parse::<BigInt>().ok()?,
            y_num: y.parse::<BigInt>().ok()?,
            denom: d.parse().ok()?,
            radicand,
            norm: n.parse().ok()?,
        }),
        (None, None, None, None) => None,
        _ => return None,
    };
    Some(QuadFieldData {
        radicand,
        discriminant: discriminant_of(radicand).ok()?,
        h: kv.get("h")?.parse().ok()?,
        h2: kv.get("h2")?.parse().ok()?,
        cl2: match kv.get("cl2") {
            Some(v) => Some(AbelianType::new(split_list(v)?)),
            None => None,
        },
        structure: match kv.get("structure") {
            Some(v) => Some(split_list(v)?),
            None => None,
        },
        h_plus: match kv.get("h_plus") {
            Some(v) => Some(v.parse().ok()?),
            None => None,
        },
        unit,
    })
}

/// Serves quadratic-field data from the cache file, computing and remembering misses.
pub struct CachedSource {
    path: PathBuf,
    known: HashMap<i64, QuadFieldData>,
    fresh: Mutex<BTreeMap<i64, QuadFieldData>>,
}

impl CachedSource {
    /// Loads `path` if it exists; malformed lines are an error since the file is ours.
    pub fn open(path: &Path) -> std::result::Result<Self, String> {
        let mut known = HashMap::new();
        if path.exists() {
            let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| format!("{}: {e}", path.display()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec = parse_record(&line).ok_or_else(|| format!("{}:{}: malformed cache record", path.display(), i + 1))?;
                known.insert(rec.radicand, rec);
            }
        }
        Ok(CachedSource { path: path.to_path_buf(), known, fresh: Mutex::new(BTreeMap::new()) })
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    /// Recomputes a random 5% of the loaded records (at least one) and returns the radicands that disagree.
    pub fn spot_check(&self) -> Vec<i64> {
        if self.known.is_empty() {
            return Vec::new();
        }
        let mut keys: Vec<i64> = self.known.keys().copied().collect();
        keys.sort_unstable();
        let amount = keys.len().div_ceil(20);
        sample(&mut rand::thread_rng(), keys.len(), amount)
            .into_iter()
            .map(|i| keys[i])
            .filter(|r| quad_field_data(*r).as_ref().ok() != self.known.get(r))
            .collect()
    }

    /// Appends records computed during this run; returns how many were written.
    pub fn flush(&self) -> std::io::Result<usize> {
        let fresh = std::mem::take(&mut *self.fresh.lock().expect("cache lock"));
        if fresh.is_empty() {
            return Ok(0);
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        for q in fresh.values() {
            writeln!(f, "{}", format_record(q))?;
        }
        Ok(fresh.len())
    }
}

impl QuadFieldSource for CachedSource {
    fn data(&self, m: i64) -> Result<QuadFieldData> {
        if let Some(q) = self.known.get(&m) {
            return Ok(q.clone());
        }
        if let Some(q) = self.fresh.lock().expect("cache lock").get(&m) {
            return Ok(q.clone());
        }
        let q = quad_field_data(m)?;
        self.fresh.lock().expect("cache lock").insert(m, q.clone());
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        for m in [-65, 65, -1155, 1155, -5, 5, 34] {
            let q = quad_field_data(m).unwrap();
            assert_eq!(parse_record(&format_record(&q)), Some(q), "m={m}");
        }
    }

    #[test]
    fn last_writer_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let good = format_record(&quad_field_data(-65).unwrap());
        std::fs::write(&path, format!("{}\n{good}\n", good.replace("h:8", "h:6"))).unwrap();
        let c = CachedSource::open(&path).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.spot_check().is_empty());
        std::fs::write(&path, format!("{good}\n{}\n", good.replace("h:8", "h:6"))).unwrap();
        assert_eq!(CachedSource::open(&path).unwrap().spot_check(), vec![-65]);
    }

    #[test]
    fn misses_are_appended() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let c = CachedSource::open(&path).unwrap();
        c.data(-65).unwrap();
        c.data(65).unwrap();
        c.data(-65).unwrap();
        assert_eq!(c.flush().unwrap(), 2);
        assert_eq!(c.flush().unwrap(), 0);
        assert_eq!(CachedSource::open(&path).unwrap().len(), 2);
    }

    #[test]
    fn malformed_line_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "radicand:x h:1\n").unwrap();
        assert!(CachedSource::open(&path).is_err());
    }
}
