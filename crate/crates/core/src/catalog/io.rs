//! Tab-separated pool files.
//!
//! ```text
//! #chromashape color-pool v1
//! id    hex    L    a    b    display_name    manual
//! 0    #1f5f9e    39.5    2.0    -44.0    blue    false
//! ```
//!
//! Shape catalogs use the header `#chromashape shape-catalog v1` and the
//! columns `id name fill_class path source_tool`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use super::{ColorEntry, ColorPool, FillClass, ShapeCatalog, ShapeEntry, DEFAULT_MARK_PX, DEFAULT_POOL_SIZE};
use crate::colorlab::{JndParams, Lab, Rgb};
use crate::error::{Error, Result};

pub const DEFAULT_COLOR_POOL: &str = include_str!("../../data/colors.tsv");
pub const DEFAULT_SHAPE_CATALOG: &str = include_str!("../../data/shapes.tsv");

const COLOR_HEADER: &str = "#chromashape color-pool v1";
const SHAPE_HEADER: &str = "#chromashape shape-catalog v1";

#[derive(Deserialize)]
struct ColorRow {
    id: u16,
    hex: String,
    #[serde(rename = "L")]
    l: f64,
    a: f64,
    b: f64,
    display_name: String,
    manual: bool,
}

#[derive(Deserialize)]
struct ShapeRow {
    id: u16,
    name: String,
    fill_class: String,
    path: String,
    source_tool: String,
}

fn split_header<'a>(text: &'a str, header: &str, source_name: &str) -> Result<&'a str> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end() != header {
        return Err(Error::Parse {
            source_name: source_name.into(),
            line: 1,
            message: format!("expected version header {header:?}, found {:?}", first.trim_end()),
        });
    }
    Ok(rest)
}

fn rows<T: for<'de> Deserialize<'de>>(body: &str, source_name: &str) -> Result<Vec<(usize, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut out = Vec::new();
    for rec in reader.deserialize::<T>() {
        match rec {
            Ok(row) => out.push((out.len() + 3, row)),
            Err(e) => {
                // csv lines are 1-based within the body; the version header
                // precedes it.
                let line = e.position().map_or(0, |p| p.line() as usize + 1);
                return Err(Error::Parse {
                    source_name: source_name.into(),
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

pub fn parse_color_pool(text: &str, source_name: &str) -> Result<ColorPool> {
    let body = split_header(text, COLOR_HEADER, source_name)?;
    let mut entries = Vec::new();
    for (line, row) in rows::<ColorRow>(body, source_name)? {
        let rgb = Rgb::from_hex(&row.hex).map_err(|e| Error::Parse {
            source_name: source_name.into(),
            line,
            message: e.to_string(),
        })?;
        entries.push(ColorEntry {
            id: row.id,
            lab: Lab::new(row.l, row.a, row.b),
            rgb,
            display_name: row.display_name,
            manual: row.manual,
        });
    }
    ColorPool::new(entries).map_err(|e| rename_source(e, source_name))
}

pub fn parse_shape_catalog(text: &str, source_name: &str) -> Result<ShapeCatalog> {
    let body = split_header(text, SHAPE_HEADER, source_name)?;
    let mut entries = Vec::new();
    for (line, row) in rows::<ShapeRow>(body, source_name)? {
        let fill_class: FillClass = row.fill_class.parse().map_err(|e: Error| Error::Parse {
            source_name: source_name.into(),
            line,
            message: e.to_string(),
        })?;
        entries.push(ShapeEntry {
            id: row.id,
            name: row.name,
            fill_class,
            path: row.path,
            source_tool: row.source_tool,
        });
    }
    ShapeCatalog::new(entries).map_err(|e| rename_source(e, source_name))
}

fn rename_source(e: Error, source_name: &str) -> Error {
    match e {
        Error::InvalidEntry { entry, message, .. } => Error::InvalidEntry {
            source_name: source_name.into(),
            entry,
            message,
        },
        other => other,
    }
}

/// Loads and fully validates a color pool and shape catalog from disk.
pub fn load_pools(colors: &Path, shapes: &Path, params: &JndParams) -> Result<(ColorPool, ShapeCatalog)> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let pool = parse_color_pool(&read(colors)?, &colors.display().to_string())?;
    let catalog = parse_shape_catalog(&read(shapes)?, &shapes.display().to_string())?;
    validate_defaults(&pool, &catalog, params, &colors.display().to_string())?;
    Ok((pool, catalog))
}

/// The bundled 39-color pool and 39-shape catalog, validated on load.
pub fn load_default_pools() -> Result<(ColorPool, ShapeCatalog)> {
    let pool = parse_color_pool(DEFAULT_COLOR_POOL, "colors.tsv")?;
    let catalog = parse_shape_catalog(DEFAULT_SHAPE_CATALOG, "shapes.tsv")?;
    validate_defaults(&pool, &catalog, &JndParams::default(), "colors.tsv")?;
    Ok((pool, catalog))
}

fn validate_defaults(pool: &ColorPool, catalog: &ShapeCatalog, params: &JndParams, name: &str) -> Result<()> {
    pool.validate(DEFAULT_POOL_SIZE, DEFAULT_MARK_PX, params)
        .map_err(|e| rename_source(e, name))?;
    catalog.validate(DEFAULT_POOL_SIZE)
}

pub fn write_color_pool(pool: &ColorPool, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{COLOR_HEADER}")?;
    writeln!(out, "id\thex\tL\ta\tb\tdisplay_name\tmanual")?;
    for e in pool.entries() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.id, e.rgb, e.lab.l, e.lab.a, e.lab.b, e.display_name, e.manual
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "#chromashape color-pool v1\nid\thex\tL\ta\tb\tdisplay_name\tmanual\n\
        0\t#ffffff\t100\t0\t0\twhite\tfalse\n1\t#000000\t0\t0\t0\tblack\ttrue\n";

    #[test]
    fn parses_small_pool() {
        let pool = parse_color_pool(TWO, "t").unwrap();
        assert_eq!(pool.len(), 2);
        assert!(pool.entries()[1].manual);
        let mut buf = Vec::new();
        write_color_pool(&pool, &mut buf).unwrap();
        assert_eq!(parse_color_pool(std::str::from_utf8(&buf).unwrap(), "t").unwrap(), pool);
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let text = TWO.replace("1\t#000000", "0\t#000000");
        match parse_color_pool(&text, "dup.tsv") {
            Err(Error::InvalidEntry { entry, message, .. }) => {
                assert_eq!(entry, "0");
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = TWO.replace("\t0\tblack", "\tzero\tblack");
        match parse_color_pool(&text, "bad.tsv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_header_rejected() {
        assert!(matches!(parse_color_pool("id\thex\n", "x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn hex_must_match_lab() {
        let text = TWO.replace("#000000", "#202020");
        assert!(matches!(parse_color_pool(&text, "x"), Err(Error::InvalidEntry { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let r = load_pools(Path::new("/nonexistent/c.tsv"), Path::new("/nonexistent/s.tsv"), &JndParams::default());
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    #[test]
    fn shape_catalog_fill_classes() {
        let cat = parse_shape_catalog(DEFAULT_SHAPE_CATALOG, "shapes.tsv").unwrap();
        assert_eq!(cat.len(), 39);
        for class in FillClass::ALL {
            assert!(cat.entries().iter().any(|e| e.fill_class == class));
        }
        let bad = DEFAULT_SHAPE_CATALOG.replacen("\tfilled\t", "\tsolid\t", 1);
        assert!(matches!(parse_shape_catalog(&bad, "s"), Err(Error::Parse { line: 3, .. })));
    }
}
