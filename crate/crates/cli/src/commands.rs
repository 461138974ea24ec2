use std::fs;
use std::path::{Path, PathBuf};

use rdh_core::codec::binary_boundary_map;
use rdh_core::par::{map_collect, Execution};
use rdh_core::pipeline::{self, default_thresholds as core_thresholds, SweepRecord};
use rdh_core::synth::{boundary_heavy_corpus, mixed_corpus, Fixture};
use rdh_core::{
    compress, compress_binary_baseline, count_boundary_pixels, decompress, embed_full, extract_full, forward, inverse,
    predict, read_pgm, write_pgm, BitStream, Error, GrayImage, PeHistogramShift, PgmFlavor, PreprocessParams,
};

use crate::report::{self, Cell, ImageInfo};
use crate::{sidecar, CliError, ParamArgs};

type Result<T> = std::result::Result<T, CliError>;

pub fn default_thresholds() -> Vec<u8> {
    core_thresholds()
}

fn params(args: ParamArgs) -> Result<PreprocessParams> {
    Ok(PreprocessParams::new(args.t, args.t0, args.t1)?)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(CliError::io(path))
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(CliError::io(path))
}

fn load_image(path: &Path) -> Result<GrayImage> {
    Ok(read_pgm(&read_file(path)?)?)
}

fn save_image(path: &Path, img: &GrayImage) -> Result<()> {
    write_file(path, &write_pgm(img, PgmFlavor::P5))
}

pub fn preprocess(input: &Path, output: &Path, map_path: &Path, args: ParamArgs) -> Result<()> {
    let params = params(args)?;
    let o = load_image(input)?;
    let out = forward(&o, params)?;
    let map = compress(&out.locmap);
    let baseline = compress_binary_baseline(&o, params.t());
    save_image(output, &out.x)?;
    write_file(map_path, &sidecar::encode(params, &map))?;
    println!("boundary_before={}", count_boundary_pixels(&o, params.t())?);
    println!("boundary_after={}", out.locmap.boundary_count());
    println!("map_bits_before={}", baseline.bit_length);
    println!("map_bits_after={}", map.bit_length);
    Ok(())
}

pub fn restore(input: &Path, map_path: &Path, output: &Path) -> Result<()> {
    let x = load_image(input)?;
    let (params, map) = sidecar::decode(&read_file(map_path)?)?;
    if (map.width, map.height) != (x.width(), x.height()) {
        return Err(Error::DimensionMismatch(format!(
            "image is {}x{} but the map is {}x{}",
            x.width(),
            x.height(),
            map.width,
            map.height
        ))
        .into());
    }
    let locmap = decompress(&map)?;
    let o = inverse(&x, &locmap, params)?;
    save_image(output, &o)
}

pub fn embed(
    input: &Path,
    payload_path: &Path,
    output: &Path,
    args: ParamArgs,
    auto: Option<&[u8]>,
    bits: Option<usize>,
) -> Result<()> {
    let o = load_image(input)?;
    let bytes = read_file(payload_path)?;
    let payload = match bits {
        Some(n) if n > bytes.len() * 8 => {
            return Err(CliError::Usage(format!("--bits {n} exceeds the {}-bit payload file", bytes.len() * 8)))
        }
        Some(n) => BitStream::from_bytes_prefix(&bytes, n),
        None => BitStream::from_bytes(&bytes),
    };
    let params = match auto {
        Some(thresholds) => {
            let rep = pipeline::sweep(&o, thresholds, args.t, &PeHistogramShift)?;
            rep.best_params()
        }
        None => params(args)?,
    };
    let res = embed_full(&o, &payload, params, &PeHistogramShift)?;
    save_image(output, &res.marked)?;
    println!("T={}", params.t());
    println!("t0={}", params.t0());
    println!("t1={}", params.t1());
    println!("payload_bits={}", res.payload_bits);
    println!("max_payload_bits={}", res.max_payload_bits);
    println!("side_info_bits={}", res.side_info_bits);
    println!("r_emb={:.6}", res.r_emb);
    println!("psnr_db={}", res.psnr);
    Ok(())
}

pub fn extract(input: &Path, payload_path: &Path, output: &Path) -> Result<()> {
    let y = load_image(input)?;
    let (payload, o) = extract_full(&y, &PeHistogramShift)?;
    write_file(payload_path, &payload.to_bytes())?;
    save_image(output, &o)?;
    println!("payload_bits={}", payload.len());
    Ok(())
}

struct Loaded {
    id: String,
    path: PathBuf,
    image: GrayImage,
}

enum Evaluated {
    Single(SweepRecord),
    Grid(pipeline::SweepReport),
}

fn list_pgm(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    Ok(files)
}

fn map_image(width: usize, height: usize, flags: impl Iterator<Item = bool>) -> GrayImage {
    GrayImage::new(width, height, flags.map(|f| if f { 255 } else { 0 }).collect()).expect("dims match")
}

pub fn analyze(
    corpus: &Path,
    csv_path: &Path,
    args: ParamArgs,
    sweep: Option<&[u8]>,
    json: Option<&Path>,
    maps: Option<&Path>,
    histogram: Option<&Path>,
) -> Result<()> {
    let single = params(args)?;
    if let Some(th) = sweep {
        if th.is_empty() {
            return Err(CliError::Usage("--thresholds must not be empty".into()));
        }
        for &t in th {
            PreprocessParams::new(args.t, t, t)?;
        }
    }
    let mut skip_code = 0u8;
    let mut skipped = 0;
    let mut loaded = Vec::new();
    for path in list_pgm(corpus)? {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match load_image(&path) {
            Ok(image) => loaded.push(Loaded { id, path, image }),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                skipped += 1;
                skip_code = skip_code.max(if matches!(e, CliError::Io { .. }) { 5 } else { 2 });
            }
        }
    }
    loaded.sort_by(|a, b| a.id.cmp(&b.id));

    let results = map_collect(Execution::default(), &loaded, |img| -> std::result::Result<Evaluated, Error> {
        Ok(match sweep {
            Some(th) => Evaluated::Grid(pipeline::sweep(&img.image, th, args.t, &PeHistogramShift)?),
            None => Evaluated::Single(pipeline::evaluate(&img.image, single, &PeHistogramShift)?),
        })
    });

    let mut rows = Vec::new();
    let mut kept: Vec<(&Loaded, Evaluated)> = Vec::new();
    for (img, res) in loaded.iter().zip(results) {
        match res {
            Ok(ev) => kept.push((img, ev)),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", img.path.display());
                skipped += 1;
                skip_code = skip_code.max(2);
            }
        }
    }
    for (img, ev) in &kept {
        let path = img.path.to_string_lossy();
        let info = ImageInfo { id: &img.id, path: &path, width: img.image.width(), height: img.image.height() };
        match ev {
            Evaluated::Single(rec) => rows.push(report::image_row(&info, args.t, rec, None)),
            Evaluated::Grid(rep) => {
                for (i, rec) in rep.records.iter().enumerate() {
                    rows.push(report::image_row(&info, args.t, rec, Some(i == rep.best)));
                }
            }
        }
    }
    if let Some(th) = sweep {
        for &t0 in th {
            for &t1 in th {
                let recs: Vec<&SweepRecord> = kept
                    .iter()
                    .filter_map(|(_, ev)| match ev {
                        Evaluated::Grid(rep) => rep.record(t0, t1),
                        Evaluated::Single(_) => None,
                    })
                    .collect();
                rows.push(report::mean_row(args.t, t0, t1, &recs));
            }
        }
    }

    let file = fs::File::create(csv_path).map_err(CliError::io(csv_path))?;
    report::write_csv(file, &rows).map_err(|e| CliError::Io { path: csv_path.into(), source: e.into() })?;
    if let Some(json_path) = json {
        let text = serde_json::to_string_pretty(&report::to_json(&rows)).expect("json values serialize");
        write_file(json_path, text.as_bytes())?;
    }

    if let Some(dir) = maps {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        for (img, ev) in &kept {
            let used = match ev {
                Evaluated::Single(_) => single,
                Evaluated::Grid(rep) => rep.best_params(),
            };
            let (w, h) = (img.image.width(), img.image.height());
            let before = map_image(w, h, binary_boundary_map(&img.image, used.t()).into_iter().map(|b| b == 1));
            let out = forward(&img.image, used)?;
            let keep = out.locmap.unclamped_symbol();
            let after = map_image(w, h, out.locmap.symbols().iter().map(|&s| s != keep));
            save_image(&dir.join(format!("{}_before.pgm", img.id)), &before)?;
            save_image(&dir.join(format!("{}_after_t0-{}_t1-{}.pgm", img.id, used.t0(), used.t1())), &after)?;
        }
    }

    if let Some(hist_path) = histogram {
        let mut counts = vec![0u64; 256 * 256];
        for img in &loaded {
            let im = &img.image;
            if im.width() < 2 || im.height() < 2 {
                continue;
            }
            for r in 0..im.height() {
                for c in 0..im.width() {
                    counts[usize::from(im.get(r, c)) * 256 + predict(im, r, c) as usize] += 1;
                }
            }
        }
        let hist_rows: Vec<Vec<Cell>> = counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| vec![Cell::Int((i / 256) as u64), Cell::Int((i % 256) as u64), Cell::Int(n)])
            .collect();
        let mut w =
            csv::Writer::from_path(hist_path).map_err(|e| CliError::Io { path: hist_path.into(), source: e.into() })?;
        let io_err = |e: csv::Error| CliError::Io { path: hist_path.into(), source: e.into() };
        w.write_record(["pixel", "prediction", "count"]).map_err(io_err)?;
        for row in hist_rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(io_err)?;
        }
        w.flush().map_err(CliError::io(hist_path))?;
    }

    println!("images={}", kept.len());
    println!("skipped={skipped}");
    if skipped > 0 {
        return Err(CliError::Skipped { count: skipped, code: skip_code });
    }
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("size {s:?} is not WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (w, h) = (w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn gen_fixtures(out: &Path, seed: u64, sizes: &[String], heavy: usize, heavy_size: &str) -> Result<()> {
    let sizes = sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>>>()?;
    let (hw, hh) = parse_size(heavy_size)?;
    fs::create_dir_all(out).map_err(CliError::io(out))?;

    let mut fixtures: Vec<Fixture> = mixed_corpus(seed, &sizes);
    fixtures.extend(boundary_heavy_corpus(seed, heavy, hw, hh).into_iter().map(|mut f| {
        f.name = format!("heavy_{}", f.name);
        f
    }));

    let manifest_path = out.join("manifest.csv");
    let io_err = |e: csv::Error| CliError::Io { path: manifest_path.clone(), source: e.into() };
    let mut manifest = csv::Writer::from_path(&manifest_path).map_err(io_err)?;
    manifest
        .write_record([
            "file",
            "kind",
            "width",
            "height",
            "seed",
            "boundary_count_t1",
            "boundary_fraction",
            "target_boundary_fraction",
        ])
        .map_err(io_err)?;
    for f in &fixtures {
        let file = format!("{}.pgm", f.name);
        save_image(&out.join(&file), &f.image)?;
        let count = count_boundary_pixels(&f.image, 1)?;
        manifest
            .write_record([
                file,
                f.kind.to_string(),
                f.image.width().to_string(),
                f.image.height().to_string(),
                seed.to_string(),
                count.to_string(),
                format!("{:.6}", count as f64 / f.image.len() as f64),
                f.target_boundary_fraction.map_or_else(String::new, |v| format!("{v:.6}")),
            ])
            .map_err(io_err)?;
    }
    manifest.flush().map_err(CliError::io(&manifest_path))?;
    println!("fixtures={}", fixtures.len());
    Ok(())
}
