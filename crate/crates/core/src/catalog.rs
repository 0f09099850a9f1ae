//! Catalog files: one record per class representative.
//!
//! A record line is
//!
//! ```text
//! signature;classMode;minimal;primesTested;trialSeeds[;degree=N:status][;tags=t1,t2]
//! ```
//!
//! with `minimal` one of `1`, `0`, `-` (untested) and the prime and seed
//! lists comma-separated. Files are kept sorted by signature and written via
//! a temporary file and a rename.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::minimality::{classify_signatures, RankTestConfig, Verdict};
use crate::monodromy::DegreeStatus;
use crate::signature::Signature;
use crate::subfamilies::SubfamilyTag;
use crate::symmetry::{canonical_form, ClassMode};

/// Records written between two checkpoints of [`classify_to_file`].
pub const CHECKPOINT_EVERY: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogRecord {
    pub signature: Signature,
    pub mode: ClassMode,
    /// `None` while untested.
    pub minimal: Option<bool>,
    pub primes_tested: Vec<u64>,
    pub trial_seeds: Vec<u64>,
    pub degree: Option<(usize, DegreeStatus)>,
    pub tags: Vec<SubfamilyTag>,
}

impl CatalogRecord {
    pub fn untested(signature: Signature, mode: ClassMode) -> Self {
        CatalogRecord {
            signature,
            mode,
            minimal: None,
            primes_tested: Vec::new(),
            trial_seeds: Vec::new(),
            degree: None,
            tags: Vec::new(),
        }
    }

    pub fn from_verdict(signature: Signature, mode: ClassMode, verdict: &Verdict) -> Self {
        CatalogRecord {
            minimal: Some(verdict.minimal),
            primes_tested: verdict.primes_tested.clone(),
            trial_seeds: verdict.trial_seeds.clone(),
            ..Self::untested(signature, mode)
        }
    }

    pub fn label_canonical(&self) -> Signature {
        canonical_form(&self.signature, ClassMode::Label)
    }

    pub fn swap_label_canonical(&self) -> Signature {
        canonical_form(&self.signature, ClassMode::SwapLabel)
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal == Some(true)
    }

    /// Adds a tag, keeping the list sorted and free of duplicates.
    pub fn add_tag(&mut self, tag: SubfamilyTag) {
        if let Err(i) = self.tags.binary_search(&tag) {
            self.tags.insert(i, tag);
        }
    }

    pub fn set_degree(&mut self, count: usize, status: DegreeStatus) -> Result<()> {
        if !self.is_minimal() {
            return Err(Error::InvalidProblem(format!("degree on a record not known to be minimal: {}", self.signature)));
        }
        self.degree = Some((count, status));
        Ok(())
    }
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn split_u64(s: &str) -> Result<Vec<u64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.parse().map_err(|_| Error::Parse(format!("bad integer `{x}`"))))
        .collect()
}

impl fmt::Display for CatalogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let minimal = match self.minimal {
            Some(true) => "1",
            Some(false) => "0",
            None => "-",
        };
        write!(
            f,
            "{};{};{};{};{}",
            self.signature,
            self.mode,
            minimal,
            join(&self.primes_tested),
            join(&self.trial_seeds)
        )?;
        if let Some((n, status)) = self.degree {
            write!(f, ";degree={n}:{status}")?;
        }
        if !self.tags.is_empty() {
            let tags: Vec<String> = self.tags.iter().map(|t| t.to_string()).collect();
            write!(f, ";tags={}", tags.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for CatalogRecord {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(';').collect();
        if fields.len() < 5 {
            return Err(Error::Parse(format!("catalog record needs 5 fields: `{line}`")));
        }
        let minimal = match fields[2] {
            "1" => Some(true),
            "0" => Some(false),
            "-" => None,
            other => return Err(Error::Parse(format!("bad minimality flag `{other}`"))),
        };
        let mut rec = CatalogRecord {
            minimal,
            primes_tested: split_u64(fields[3])?,
            trial_seeds: split_u64(fields[4])?,
            ..Self::untested(fields[0].parse()?, fields[1].parse()?)
        };
        for extra in &fields[5..] {
            if let Some(d) = extra.strip_prefix("degree=") {
                let (n, status) = d
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad degree field `{d}`")))?;
                let n = n.parse().map_err(|_| Error::Parse(format!("bad degree `{n}`")))?;
                rec.set_degree(n, status.parse()?)?;
            } else if let Some(t) = extra.strip_prefix("tags=") {
                for tag in t.split(',').filter(|s| !s.is_empty()) {
                    rec.add_tag(tag.parse()?);
                }
            } else {
                return Err(Error::Parse(format!("unknown catalog field `{extra}`")));
            }
        }
        Ok(rec)
    }
}

/// Counts printed by `stats`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CatalogStats {
    pub records: usize,
    pub minimal: usize,
    pub nonminimal: usize,
    pub untested: usize,
    pub with_degree: usize,
    pub tagged: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    records: Vec<CatalogRecord>,
}

impl Catalog {
    /// Sorts by signature; a later record for the same signature wins.
    pub fn new(records: Vec<CatalogRecord>) -> Self {
        let mut records = records;
        records.reverse();
        records.sort_by_key(|r| r.signature);
        records.dedup_by_key(|r| r.signature);
        Catalog { records }
    }

    pub fn records(&self) -> &[CatalogRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [CatalogRecord] {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, sig: &Signature) -> Option<&CatalogRecord> {
        self.records
            .binary_search_by_key(sig, |r| r.signature)
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn get_mut(&mut self, sig: &Signature) -> Option<&mut CatalogRecord> {
        match self.records.binary_search_by_key(sig, |r| r.signature) {
            Ok(i) => Some(&mut self.records[i]),
            Err(_) => None,
        }
    }

    /// Inserts or replaces the record for its signature.
    pub fn upsert(&mut self, rec: CatalogRecord) {
        match self.records.binary_search_by_key(&rec.signature, |r| r.signature) {
            Ok(i) => self.records[i] = rec,
            Err(i) => self.records.insert(i, rec),
        }
    }

    pub fn minimal_signatures(&self) -> Vec<Signature> {
        self.records.iter().filter(|r| r.is_minimal()).map(|r| r.signature).collect()
    }

    pub fn stats(&self) -> CatalogStats {
        let mut s = CatalogStats { records: self.records.len(), ..Default::default() };
        for r in &self.records {
            match r.minimal {
                Some(true) => s.minimal += 1,
                Some(false) => s.nonminimal += 1,
                None => s.untested += 1,
            }
            s.with_degree += r.degree.is_some() as usize;
            s.tagged += !r.tags.is_empty() as usize;
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Catalog::new(records))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Catalog::parse(&fs::read_to_string(path)?)
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        for r in &self.records {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    /// Writes to a sibling temporary file, then renames it over `path`.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let tmp = sibling(path, "tmp");
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            self.write_to(&mut w)?;
            w.into_inner().map_err(|e| Error::Io(e.to_string()))?.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(ext);
    path.with_file_name(name)
}

/// Path of the append-only checkpoint kept while `out` is being built.
pub fn checkpoint_path(out: &Path) -> PathBuf {
    sibling(out, "partial")
}

fn read_checkpoint(path: &Path) -> Result<Vec<CatalogRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut done = Vec::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        // a torn last line from an interrupted run is dropped
        match line.parse() {
            Ok(r) => done.push(r),
            Err(_) => break,
        }
    }
    Ok(done)
}

/// Classifies `reps` and writes the catalog to `out`. Finished records are
/// appended to a checkpoint file every [`CHECKPOINT_EVERY`] classes; a rerun
/// picks up from there. `progress` sees the number of records done.
pub fn classify_to_file(
    reps: &[Signature],
    mode: ClassMode,
    config: &RankTestConfig,
    out: &Path,
    mut progress: impl FnMut(usize),
) -> Result<Catalog> {
    let ckpt = checkpoint_path(out);
    let mut records = read_checkpoint(&ckpt)?;
    let done: BTreeSet<Signature> = records.iter().map(|r| r.signature).collect();
    let todo: Vec<Signature> = reps.iter().filter(|s| !done.contains(s)).copied().collect();
    // rewrite the checkpoint so a torn tail does not linger
    {
        let mut w = BufWriter::new(fs::File::create(&ckpt)?);
        for r in &records {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
    }
    let mut file = fs::OpenOptions::new().append(true).open(&ckpt)?;
    progress(records.len());
    for chunk in todo.chunks(CHECKPOINT_EVERY) {
        let verdicts = classify_signatures(chunk, config)?;
        let mut buf = String::new();
        for (sig, v) in verdicts {
            let rec = CatalogRecord::from_verdict(sig, mode, &v);
            buf.push_str(&rec.to_string());
            buf.push('\n');
            records.push(rec);
        }
        file.write_all(buf.as_bytes())?;
        file.sync_data()?;
        progress(records.len());
    }
    let catalog = Catalog::new(records);
    catalog.write_atomic(out)?;
    fs::remove_file(&ckpt)?;
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(&str, u64)]) -> Signature {
        Signature::from_named(entries).unwrap()
    }

    fn sample() -> CatalogRecord {
        let mut r = CatalogRecord::untested(sig(&[("c00", 3), ("f", 1)]), ClassMode::SwapLabel);
        r.minimal = Some(true);
        r.primes_tested = vec![32003];
        r.trial_seeds = vec![17];
        r.set_degree(216, DegreeStatus::Stabilized).unwrap();
        r.add_tag(SubfamilyTag::Pl0p);
        r
    }

    #[test]
    fn record_round_trip() {
        let r = sample();
        let line = r.to_string();
        assert!(line.ends_with(";32003;17;degree=216:stabilized;tags=pl0p"), "{line}");
        assert_eq!(line.parse::<CatalogRecord>().unwrap(), r);
        let u = CatalogRecord::untested(Signature::zero(), ClassMode::Label);
        assert_eq!(u.to_string().parse::<CatalogRecord>().unwrap(), u);
    }

    #[test]
    fn degree_needs_minimal() {
        let mut r = CatalogRecord::untested(Signature::zero(), ClassMode::Label);
        assert!(r.set_degree(1, DegreeStatus::Stabilized).is_err());
        let line = format!("{};label;0;2;1;degree=3:stabilized", Signature::zero());
        assert!(line.parse::<CatalogRecord>().is_err());
    }

    #[test]
    fn canonical_fields_are_fixpoints() {
        let r = CatalogRecord::untested(sig(&[("c01c", 2), ("c00", 1), ("c12b", 1)]), ClassMode::Label);
        let l = r.label_canonical();
        assert_eq!(canonical_form(&l, ClassMode::Label), l);
        let s = r.swap_label_canonical();
        assert_eq!(canonical_form(&s, ClassMode::SwapLabel), s);
    }

    #[test]
    fn catalog_sorts_and_counts() {
        let a = sample();
        let mut b = CatalogRecord::untested(sig(&[("c01a", 11)]), ClassMode::SwapLabel);
        b.minimal = Some(false);
        let cat = Catalog::new(vec![a.clone(), b.clone()]);
        assert!(cat.records().windows(2).all(|w| w[0].signature < w[1].signature));
        let s = cat.stats();
        assert_eq!((s.minimal, s.nonminimal, s.untested, s.with_degree, s.tagged), (1, 1, 0, 1, 1));
        let again = Catalog::parse(&cat.to_string()).unwrap();
        assert_eq!(again, cat);
        assert_eq!(cat.get(&a.signature), Some(&a));
    }

    #[test]
    fn classify_resumes_from_checkpoint() {
        let dir = std::env::temp_dir().join(format!("pl1p-cat-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let out = dir.join("small.cat");
        let reps = [sig(&[("c00", 3), ("f", 1)]), sig(&[("c01c", 11)])];
        let cfg = RankTestConfig::default();
        // pretend the first record was done by an interrupted run
        let first = classify_signatures(&reps[..1], &cfg).unwrap();
        let rec = CatalogRecord::from_verdict(first[0].0, ClassMode::Label, &first[0].1);
        fs::write(checkpoint_path(&out), format!("{rec}\n{}", "garbage;")).unwrap();
        let mut seen = Vec::new();
        let cat = classify_to_file(&reps, ClassMode::Label, &cfg, &out, |n| seen.push(n)).unwrap();
        assert_eq!(seen, vec![1, 2]);
        assert_eq!(cat.len(), 2);
        assert!(!checkpoint_path(&out).exists());
        assert_eq!(Catalog::read(&out).unwrap(), cat);
        fs::remove_dir_all(&dir).unwrap();
    }
}
