//! CSV formats.
//!
//! Floats are written with the shortest representation that round-trips, so
//! identical values always produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mola_core::analysis::{Flashpoint, GrayAreaMap, LandauSurface, ParcelTally, TernaryPoint};
use mola_core::nucleation::{FlashpointPrediction, RegionMask};
use mola_core::sampler::SampleRecord;
use mola_core::{EnergyBreakdown, LandUseGrid, SuitabilityField};

use crate::error::{MolaError, Result};

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| MolaError::io(dir, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| MolaError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| MolaError::io(path, e))
}

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| MolaError::format(path, e.to_string()))
}

fn parse<T: std::str::FromStr>(path: &Path, line: u64, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| MolaError::format(path, format!("line {line}: cannot parse {what} from `{field}`")))
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let got = rdr.headers().map_err(|e| MolaError::format(path, e.to_string()))?;
    if got.iter().ne(expected.iter().copied()) {
        return Err(MolaError::format(
            path,
            format!("expected header `{}`, found `{}`", expected.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

/// Reads an integer matrix without header, one CSV row per grid row.
fn read_matrix<T: std::str::FromStr>(path: &Path) -> Result<(usize, usize, Vec<T>)> {
    let mut rdr = reader(path, false)?;
    let mut cols = None;
    let mut rows = 0;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(MolaError::format(path, format!("line {line}: {} columns, expected {c}", rec.len())))
            }
            _ => {}
        }
        for f in rec.iter() {
            values.push(parse(path, line, f, "value")?);
        }
        rows += 1;
    }
    match cols {
        Some(c) if rows > 0 => Ok((rows, c, values)),
        _ => Err(MolaError::format(path, "empty matrix")),
    }
}

fn matrix_to_string<T: std::fmt::Display>(rows: usize, cols: usize, values: &[T]) -> String {
    let mut s = String::new();
    for r in 0..rows {
        for c in 0..cols {
            if c > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", values[r * cols + c]);
        }
        s.push('\n');
    }
    s
}

/// Long-form suitability file with header `i,j,s,c`. Dimensions are taken
/// from the largest indices; every `(i, j, s)` must appear exactly once.
pub fn read_suitability_csv(path: &Path) -> Result<SuitabilityField> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &["i", "j", "s", "c"])?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(MolaError::format(path, format!("line {line}: expected 4 fields")));
        }
        let i: usize = parse(path, line, &rec[0], "i")?;
        let j: usize = parse(path, line, &rec[1], "j")?;
        let s: usize = parse(path, line, &rec[2], "s")?;
        let c: f64 = parse(path, line, &rec[3], "c")?;
        entries.push((i, j, s, c));
    }
    if entries.is_empty() {
        return Err(MolaError::format(path, "no suitability rows"));
    }
    let rows = entries.iter().map(|e| e.0).max().unwrap_or(0) + 1;
    let cols = entries.iter().map(|e| e.1).max().unwrap_or(0) + 1;
    let types = entries.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let mut scores = vec![f64::NAN; rows * cols * types];
    let mut seen = vec![false; scores.len()];
    for (i, j, s, c) in entries {
        let k = (i * cols + j) * types + s;
        if seen[k] {
            return Err(MolaError::format(path, format!("duplicate entry for (i={i}, j={j}, s={s})")));
        }
        seen[k] = true;
        scores[k] = c;
    }
    if let Some(k) = seen.iter().position(|&x| !x) {
        let (cell, s) = (k / types, k % types);
        return Err(MolaError::format(
            path,
            format!("missing entry for (i={}, j={}, s={s})", cell / cols, cell % cols),
        ));
    }
    SuitabilityField::from_scores(rows, cols, types, scores).map_err(|e| MolaError::format(path, e.to_string()))
}

pub fn suitability_csv(field: &SuitabilityField) -> String {
    let mut s = String::from("i,j,s,c\n");
    for i in 0..field.rows() {
        for j in 0..field.cols() {
            for t in 0..field.types() {
                let _ = writeln!(s, "{i},{j},{t},{}", field.score(i, j, t));
            }
        }
    }
    s
}

/// Path of layer `s` for a layered suitability stem: `<stem>.<s>.csv`.
pub fn layer_path(stem: &Path, s: usize) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(format!(".{s}.csv"));
    PathBuf::from(p)
}

/// Layered suitability: one headerless `N x M` matrix per type.
pub fn read_suitability_layered(stem: &Path, types: usize) -> Result<SuitabilityField> {
    if types == 0 {
        return Err(MolaError::format(stem, "layered suitability needs at least one type"));
    }
    let mut layers = Vec::with_capacity(types);
    for s in 0..types {
        let path = layer_path(stem, s);
        let (rows, cols, values) = read_matrix::<f64>(&path)?;
        if let Some((r0, c0, _)) = layers.first() {
            let (r0, c0) = (*r0, *c0);
            if (rows, cols) != (r0, c0) {
                return Err(MolaError::format(&path, format!("layer is {rows}x{cols}, expected {r0}x{c0}")));
            }
        }
        layers.push((rows, cols, values));
    }
    let (rows, cols) = (layers[0].0, layers[0].1);
    let mut scores = Vec::with_capacity(rows * cols * types);
    for k in 0..rows * cols {
        for layer in &layers {
            scores.push(layer.2[k]);
        }
    }
    SuitabilityField::from_scores(rows, cols, types, scores).map_err(|e| MolaError::format(stem, e.to_string()))
}

pub fn write_suitability_layered(stem: &Path, field: &SuitabilityField) -> Result<()> {
    let n = field.rows() * field.cols();
    for s in 0..field.types() {
        let layer: Vec<f64> = (0..n).map(|k| field.at(k)[s]).collect();
        write_atomic(&layer_path(stem, s), matrix_to_string(field.rows(), field.cols(), &layer).as_bytes())?;
    }
    Ok(())
}

/// Grid snapshot: headerless matrix of type codes. `types` is the size of
/// the type set the codes are checked against.
pub fn read_grid_csv(path: &Path, types: usize) -> Result<LandUseGrid> {
    let (rows, cols, cells) = read_matrix::<u8>(path)?;
    LandUseGrid::from_cells(rows, cols, types, cells).map_err(|e| MolaError::format(path, e.to_string()))
}

pub fn grid_csv(grid: &LandUseGrid) -> String {
    matrix_to_string(grid.rows(), grid.cols(), grid.cells())
}

/// Region mask: headerless matrix of 0/1.
pub fn read_mask_csv(path: &Path) -> Result<RegionMask> {
    let (rows, cols, values) = read_matrix::<u8>(path)?;
    if values.iter().any(|&v| v > 1) {
        return Err(MolaError::format(path, "mask entries must be 0 or 1"));
    }
    RegionMask::from_cells(rows, cols, values.into_iter().map(|v| v == 1).collect())
        .map_err(|e| MolaError::format(path, e.to_string()))
}

pub fn mask_csv(mask: &RegionMask) -> String {
    let v: Vec<u8> = mask.cells().iter().map(|&b| b as u8).collect();
    matrix_to_string(mask.rows(), mask.cols(), &v)
}

/// `seed,sweep,N_0,..,N_{S-1},O1,O2,H`.
pub fn samples_csv<'a>(types: usize, rows: impl IntoIterator<Item = (u64, &'a SampleRecord)>) -> String {
    let mut s = String::from("seed,sweep");
    for t in 0..types {
        let _ = write!(s, ",N_{t}");
    }
    s.push_str(",O1,O2,H\n");
    for (seed, r) in rows {
        let _ = write!(s, "{seed},{}", r.sweep_index);
        for n in &r.use_counts {
            let _ = write!(s, ",{n}");
        }
        let e = &r.energy;
        let _ = writeln!(s, ",{},{},{}", e.compactness, e.suitability, e.total);
    }
    s
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<(u64, SampleRecord)>> {
    let mut rdr = reader(path, true)?;
    let header = rdr.headers().map_err(|e| MolaError::format(path, e.to_string()))?.clone();
    let types = header.len().checked_sub(5).filter(|&t| t > 0).ok_or_else(|| {
        MolaError::format(path, "expected header `seed,sweep,N_0,...,O1,O2,H`")
    })?;
    let mut expected = vec!["seed".to_string(), "sweep".to_string()];
    expected.extend((0..types).map(|t| format!("N_{t}")));
    expected.extend(["O1", "O2", "H"].map(String::from));
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(MolaError::format(path, format!("expected header `{}`", expected.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let seed = parse(path, line, &rec[0], "seed")?;
        let sweep_index = parse(path, line, &rec[1], "sweep")?;
        let use_counts = (0..types).map(|t| parse(path, line, &rec[2 + t], "count")).collect::<Result<Vec<usize>>>()?;
        let energy = EnergyBreakdown {
            compactness: parse(path, line, &rec[2 + types], "O1")?,
            suitability: parse(path, line, &rec[3 + types], "O2")?,
            total: parse(path, line, &rec[4 + types], "H")?,
        };
        out.push((seed, SampleRecord { sweep_index, use_counts, energy, snapshot: None }));
    }
    Ok(out)
}

/// `n,P_low,P_high,type,rel_change`, one row per triggering type.
pub fn flashpoints_csv(flashpoints: &[Flashpoint]) -> String {
    let mut s = String::from("n,P_low,P_high,type,rel_change\n");
    for fp in flashpoints {
        for t in &fp.triggers {
            let _ = writeln!(s, "{},{},{},{},{}", fp.index, fp.p_low, fp.p_high, t.ty, t.rel_change);
        }
    }
    s
}

/// `i,j,re,im,modulus,argument`.
pub fn gray_area_csv(map: &GrayAreaMap) -> String {
    let mut s = String::from("i,j,re,im,modulus,argument\n");
    for i in 0..map.rows {
        for j in 0..map.cols {
            let (re, im) = map.value(i, j);
            let _ = writeln!(s, "{i},{j},{re},{im},{},{}", map.modulus_at(i, j), map.argument_at(i, j));
        }
    }
    s
}

/// Gray-area rows as `(i, j, re, im, modulus, argument)`.
pub fn read_gray_area_csv(path: &Path) -> Result<Vec<(usize, usize, f64, f64, f64, f64)>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &["i", "j", "re", "im", "modulus", "argument"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 6 {
            return Err(MolaError::format(path, format!("line {line}: expected 6 fields")));
        }
        out.push((
            parse(path, line, &rec[0], "i")?,
            parse(path, line, &rec[1], "j")?,
            parse(path, line, &rec[2], "re")?,
            parse(path, line, &rec[3], "im")?,
            parse(path, line, &rec[4], "modulus")?,
            parse(path, line, &rec[5], "argument")?,
        ));
    }
    Ok(out)
}

/// `sample,x,y,w0,w1,w2`.
pub fn ternary_csv(points: &[TernaryPoint]) -> String {
    let mut s = String::from("sample,x,y,w0,w1,w2\n");
    for (k, p) in points.iter().enumerate() {
        let [w0, w1, w2] = p.weights;
        let _ = writeln!(s, "{k},{},{},{w0},{w1},{w2}", p.x, p.y);
    }
    s
}

pub fn read_ternary_csv(path: &Path) -> Result<Vec<TernaryPoint>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &["sample", "x", "y", "w0", "w1", "w2"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 6 {
            return Err(MolaError::format(path, format!("line {line}: expected 6 fields")));
        }
        let w = [
            parse(path, line, &rec[3], "w0")?,
            parse(path, line, &rec[4], "w1")?,
            parse(path, line, &rec[5], "w2")?,
        ];
        let (x, y) = (parse(path, line, &rec[1], "x")?, parse(path, line, &rec[2], "y")?);
        out.push(TernaryPoint { weights: w, x, y });
    }
    Ok(out)
}

/// `bin,F,count`.
pub fn landau_csv(surface: &LandauSurface) -> String {
    let mut s = String::from("bin,F,count\n");
    for p in &surface.points {
        let _ = writeln!(s, "{},{},{}", p.bin, p.f, p.count);
    }
    s
}

pub fn read_landau_csv(path: &Path) -> Result<Vec<(usize, f64, u64)>> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &["bin", "F", "count"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(MolaError::format(path, format!("line {line}: expected 3 fields")));
        }
        out.push((parse(path, line, &rec[0], "bin")?, parse(path, line, &rec[1], "F")?, parse(path, line, &rec[2], "count")?));
    }
    Ok(out)
}

/// `L,A,mode,deltaEM,m,P_S_star`.
pub fn prediction_csv(predictions: &[FlashpointPrediction]) -> String {
    let mut s = String::from("L,A,mode,deltaEM,m,P_S_star\n");
    for p in predictions {
        let _ = writeln!(s, "{},{},{},{},{},{}", p.boundary, p.area, p.metric.name(), p.delta_em, p.margin, p.p_s_star);
    }
    s
}

/// Per-parcel type counts behind a gray-area map: `i,j,n_0,n_1,n_2`.
pub fn tally_csv(tally: &ParcelTally) -> String {
    let mut s = String::from("i,j,n_0,n_1,n_2\n");
    for (k, c) in tally.counts().iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{},{}", k / tally.cols(), k % tally.cols(), c[0], c[1], c[2]);
    }
    s
}

pub fn read_tally_csv(path: &Path) -> Result<ParcelTally> {
    let mut rdr = reader(path, true)?;
    check_header(path, &mut rdr, &["i", "j", "n_0", "n_1", "n_2"])?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| MolaError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(MolaError::format(path, format!("line {line}: expected 5 fields")));
        }
        let i: usize = parse(path, line, &rec[0], "i")?;
        let j: usize = parse(path, line, &rec[1], "j")?;
        let c = [parse(path, line, &rec[2], "n_0")?, parse(path, line, &rec[3], "n_1")?, parse(path, line, &rec[4], "n_2")?];
        rows.push((i, j, c));
    }
    let r = rows.iter().map(|x| x.0).max().map_or(0, |m| m + 1);
    let c = rows.iter().map(|x| x.1).max().map_or(0, |m| m + 1);
    let mut counts = vec![[0u64; 3]; r * c];
    let mut seen = vec![false; r * c];
    for (i, j, v) in rows {
        seen[i * c + j] = true;
        counts[i * c + j] = v;
    }
    if seen.iter().any(|&s| !s) {
        return Err(MolaError::format(path, "tally does not cover every parcel"));
    }
    ParcelTally::from_counts(r, c, counts).map_err(|e| MolaError::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mola_core::analysis::ternary_project;
    use mola_core::{LandUseType, PrioritySet};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn suitability_round_trip_both_forms() {
        let scores = (0..2 * 3 * 3).map(|k| k as f64 * 0.25 - 1.0).collect();
        let field = SuitabilityField::from_scores(2, 3, 3, scores).unwrap();
        let dir = tmp();
        let long = dir.path().join("c.csv");
        fs::write(&long, suitability_csv(&field)).unwrap();
        assert_eq!(read_suitability_csv(&long).unwrap(), field);
        let stem = dir.path().join("layers");
        write_suitability_layered(&stem, &field).unwrap();
        assert!(dir.path().join("layers.2.csv").exists());
        assert_eq!(read_suitability_layered(&stem, 3).unwrap(), field);
    }

    #[test]
    fn missing_and_duplicate_suitability_rows_rejected() {
        let dir = tmp();
        let p = dir.path().join("c.csv");
        fs::write(&p, "i,j,s,c\n0,0,0,1\n0,0,1,1\n1,0,0,1\n").unwrap();
        let e = read_suitability_csv(&p).unwrap_err().to_string();
        assert!(e.contains("missing entry for (i=1, j=0, s=1)"), "{e}");
        fs::write(&p, "i,j,s,c\n0,0,0,1\n0,0,0,2\n").unwrap();
        assert!(read_suitability_csv(&p).unwrap_err().to_string().contains("duplicate"));
        fs::write(&p, "i,j,c\n0,0,1\n").unwrap();
        assert!(read_suitability_csv(&p).unwrap_err().to_string().contains("header"));
    }

    #[test]
    fn grid_and_mask_round_trip() {
        let dir = tmp();
        let mut g = LandUseGrid::uniform(3, 4, 3, LandUseType(0)).unwrap();
        g.set(1, 2, LandUseType(2)).unwrap();
        let p = dir.path().join("g.csv");
        fs::write(&p, grid_csv(&g)).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "0,0,0,0\n0,0,2,0\n0,0,0,0\n");
        assert_eq!(read_grid_csv(&p, 3).unwrap(), g);
        assert!(read_grid_csv(&p, 2).is_err());

        let m = RegionMask::rectangle(4, 5, 1, 1, 2, 3).unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, mask_csv(&m)).unwrap();
        assert_eq!(read_mask_csv(&p).unwrap(), m);
        fs::write(&p, "0,1\n2,0\n").unwrap();
        assert!(read_mask_csv(&p).is_err());
        fs::write(&p, "0,1\n0\n").unwrap();
        assert!(read_mask_csv(&p).is_err());
    }

    #[test]
    fn samples_round_trip() {
        let p = PrioritySet::new(1.0, 0.5, 1.0).unwrap();
        let r = SampleRecord {
            sweep_index: 50,
            use_counts: vec![4, 1, 1],
            energy: EnergyBreakdown::new(-10.0, -0.75, &p),
            snapshot: None,
        };
        let text = samples_csv(3, [(7, &r), (8, &r)]);
        assert!(text.starts_with("seed,sweep,N_0,N_1,N_2,O1,O2,H\n7,50,4,1,1,-10,-0.75,-10.375\n"));
        let dir = tmp();
        let path = dir.path().join("s.csv");
        fs::write(&path, &text).unwrap();
        let back = read_samples_csv(&path).unwrap();
        assert_eq!(back, vec![(7, r.clone()), (8, r)]);
    }

    #[test]
    fn ternary_and_tally_round_trip() {
        let pts: Vec<_> = [[900, 0, 0], [300, 300, 300], [0, 450, 450]]
            .iter()
            .map(|c| ternary_project(c, 900).unwrap())
            .collect();
        let dir = tmp();
        let path = dir.path().join("t.csv");
        fs::write(&path, ternary_csv(&pts)).unwrap();
        assert_eq!(read_ternary_csv(&path).unwrap(), pts);

        let mut tally = ParcelTally::new(2, 2);
        let mut g = LandUseGrid::uniform(2, 2, 3, LandUseType(1)).unwrap();
        tally.add(&g).unwrap();
        g.set(0, 1, LandUseType(2)).unwrap();
        tally.add(&g).unwrap();
        let path = dir.path().join("tally.csv");
        fs::write(&path, tally_csv(&tally)).unwrap();
        assert_eq!(read_tally_csv(&path).unwrap(), tally);
    }
}
