//! Self-contained HTML export of attention highlights.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::TokenWeightMap;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Render token highlights (darker background = higher weight) into a
/// self-contained HTML file, plus a JSON sidecar (`<path>.json`) with the raw
/// weights.
pub fn export_highlight_html(maps: &[TokenWeightMap], path: &Path) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::Argument("no token weight maps to export".into()));
    }
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>attention highlights</title>\n");
    html.push_str("<style>\nbody { font-family: serif; margin: 2em; }\n");
    html.push_str(".sentence { margin: 0.6em 0; }\n");
    html.push_str(".sid { color: #666; font-size: 0.8em; margin-right: 0.8em; }\n");
    html.push_str("span.tok { padding: 0.1em 0.15em; border-radius: 2px; }\n</style>\n");
    html.push_str("</head>\n<body>\n<h1>Token attention</h1>\n");
    for map in maps {
        html.push_str("<div class=\"sentence\">");
        let _ = write!(html, "<span class=\"sid\">{}</span>", escape(&map.sentence_id));
        for (tok, w) in map.tokens.iter().zip(&map.weights) {
            if *w <= 0.0 {
                let _ = write!(html, "<span class=\"tok\">{}</span> ", escape(tok));
            } else {
                let _ = write!(
                    html,
                    "<span class=\"tok\" style=\"background-color: rgba(204,85,0,{w:.3})\">{}</span> ",
                    escape(tok)
                );
            }
        }
        html.push_str("</div>\n");
    }
    html.push_str("</body>\n</html>\n");
    std::fs::write(path, &html).map_err(|e| Error::file(path.display().to_string(), e))?;

    let sidecar = path.with_extension(format!(
        "{}json",
        path.extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let json = serde_json::to_string_pretty(maps).expect("maps serialize");
    std::fs::write(&sidecar, json).map_err(|e| Error::file(sidecar.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> TokenWeightMap {
        TokenWeightMap {
            sentence_id: "s1".into(),
            tokens: vec!["taxes".into(), "rose".into(), "<fast>".into()],
            weights: vec![1.0, 0.25, 0.0],
        }
    }

    #[test]
    fn one_sentence_renders_one_row_and_json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.html");
        export_highlight_html(&[map()], &path).unwrap();
        let html = std::fs::read_to_string(&path).unwrap();
        assert_eq!(html.matches("class=\"sentence\"").count(), 1);
        // Zero-weight token carries no background style; markup is escaped.
        assert!(html.contains("<span class=\"tok\">&lt;fast&gt;</span>"));
        assert!(html.contains("rgba(204,85,0,1.000)"));

        let sidecar = dir.path().join("out.html.json");
        let loaded: Vec<TokenWeightMap> =
            serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
        assert_eq!(loaded, vec![map()]);
    }

    #[test]
    fn empty_map_list_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            export_highlight_html(&[], &dir.path().join("x.html")),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unwritable_path_is_file_error() {
        assert!(matches!(
            export_highlight_html(&[map()], Path::new("/no/such/dir/out.html")),
            Err(Error::File { .. })
        ));
    }

    #[test]
    fn golden_file_comparison_is_byte_identical() {
        let golden_path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../fixtures/golden/highlight.html"
        );
        let maps = vec![
            map(),
            TokenWeightMap {
                sentence_id: "s2".into(),
                tokens: vec!["medicare".into(), "works".into()],
                weights: vec![0.5, 1.0],
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("golden.html");
        export_highlight_html(&maps, &path).unwrap();
        let produced = std::fs::read(&path).unwrap();
        if std::env::var("GOLDEN_WRITE").is_ok() {
            std::fs::write(golden_path, &produced).unwrap();
        }
        let golden = std::fs::read(golden_path).expect("golden file present");
        assert_eq!(produced, golden);
    }
}
