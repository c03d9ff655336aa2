//! Static PNG line plots of finished CSV reports.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{CmvError, Result};

const PALETTE: [[u8; 3]; 6] =
    [[31, 119, 180], [214, 39, 40], [44, 160, 44], [148, 103, 189], [255, 127, 14], [23, 190, 207]];
const MARGIN: u32 = 40;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CmvError::Io(format!("{}: {e}", path.display())))?;
    let header = rd.headers().map_err(|e| CmvError::Io(e.to_string()))?.iter().map(String::from).collect();
    let rows = rd
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| CmvError::Io(e.to_string()))?;
    Ok(Table { header, rows })
}

fn column(t: &Table, name: &str) -> Result<Vec<f64>> {
    let i =
        t.header.iter().position(|h| h == name).ok_or_else(|| CmvError::Config(format!("no column named {name:?}")))?;
    Ok(t.rows.iter().map(|r| r.get(i).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN)).collect())
}

fn is_numeric(t: &Table, i: usize) -> bool {
    !t.rows.is_empty() && t.rows.iter().all(|r| r.get(i).is_some_and(|v| v.parse::<f64>().is_ok()))
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: Rgb<u8>) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = (x0 + t * (x1 - x0)).round();
        let y = (y0 + t * (y1 - y0)).round();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Draws `ys` against `x` from the CSV at `input` into a PNG at `output`.
pub fn plot_csv(input: &Path, output: &Path, x: Option<&str>, ys: &[String], width: u32, height: u32) -> Result<()> {
    if width <= 2 * MARGIN || height <= 2 * MARGIN {
        return Err(CmvError::Config(format!("plot must be larger than {}x{}", 2 * MARGIN, 2 * MARGIN)));
    }
    let t = read_table(input)?;
    let x_name = x
        .map(String::from)
        .or_else(|| t.header.first().cloned())
        .ok_or_else(|| CmvError::Config("empty CSV".into()))?;
    let y_names: Vec<String> = if ys.is_empty() {
        (0..t.header.len())
            .filter(|&i| t.header[i] != x_name && t.header[i] != "n" && is_numeric(&t, i))
            .map(|i| t.header[i].clone())
            .collect()
    } else {
        ys.to_vec()
    };
    let xs = column(&t, &x_name)?;
    let series: Vec<Vec<f64>> = y_names.iter().map(|n| column(&t, n)).collect::<Result<_>>()?;
    let (xlo, xhi) = bounds(xs.iter().copied());
    let (ylo, yhi) = bounds(series.iter().flatten().copied());

    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let (w, h) = ((width - 2 * MARGIN) as f64, (height - 2 * MARGIN) as f64);
    let px = |x: f64| MARGIN as f64 + (x - xlo) / (xhi - xlo) * w;
    let py = |y: f64| (height - MARGIN) as f64 - (y - ylo) / (yhi - ylo) * h;
    let axis = Rgb([0, 0, 0]);
    line(&mut img, (px(xlo), py(ylo)), (px(xhi), py(ylo)), axis);
    line(&mut img, (px(xlo), py(ylo)), (px(xlo), py(yhi)), axis);
    if ylo < 0.0 && yhi > 0.0 {
        line(&mut img, (px(xlo), py(0.0)), (px(xhi), py(0.0)), Rgb([200, 200, 200]));
    }
    for (k, ys) in series.iter().enumerate() {
        let c = Rgb(PALETTE[k % PALETTE.len()]);
        let pts: Vec<(f64, f64)> =
            xs.iter().zip(ys).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (px(*a), py(*b))).collect();
        for pair in pts.windows(2) {
            line(&mut img, pair[0], pair[1], c);
        }
    }
    img.save(output).map_err(|e| CmvError::Io(format!("{}: {e}", output.display())))
}
