//! HTML to plain text.
//!
//! Tags are removed. `script`, `style`, `noscript` and `title` are raw-text
//! elements dropped with their content; `head` and `nav` are dropped with
//! everything nested in them. Block-level boundaries become line breaks,
//! character references are decoded and whitespace is collapsed (a run that
//! contains a newline becomes one newline, any other run one space).
//!
//! The output never contains `<` directly followed by something that would
//! parse as markup, nor `&` followed by a decodable reference: such
//! sequences get a space after the `<` or `&`. That keeps the function
//! idempotent on its own output.

use super::entities;

const RAW_TEXT: &[&str] = &["script", "style", "noscript", "title"];
const DROPPED_CONTAINERS: &[&str] = &["head", "nav"];
const BLOCK: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "caption", "center", "dd", "details",
    "dialog", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
    "h3", "h4", "h5", "h6", "header", "hr", "html", "li", "main", "ol", "option", "p", "pre",
    "section", "summary", "table", "tbody", "tfoot", "thead", "tr", "ul",
];
const CELL: &[&str] = &["td", "th"];

enum Markup<'a> {
    Start { name: String, self_closing: bool, end: usize, _raw: &'a str },
    End { name: String, end: usize },
    Comment { end: usize },
    Text,
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'-' || b == b':' || b == b'_'
}

/// Classifies the markup starting at `html[i] == '<'`. `end` is the byte
/// index just past the construct (the input length when unterminated).
fn scan_markup(html: &str, i: usize) -> Markup<'_> {
    let bytes = html.as_bytes();
    let rest = &bytes[i..];
    let find_gt = |from: usize| html[from..].find('>').map_or(html.len(), |p| from + p + 1);
    if rest.starts_with(b"<!--") {
        let end = html[i + 2..].find("-->").map_or(html.len(), |p| i + 2 + p + 3);
        return Markup::Comment { end };
    }
    match rest.get(1) {
        Some(b'!') | Some(b'?') => Markup::Comment { end: find_gt(i + 1) },
        Some(b'/') => match rest.get(2) {
            Some(c) if c.is_ascii_alphabetic() => {
                let name_len = rest[2..].iter().take_while(|b| is_name_char(**b)).count();
                let name = html[i + 2..i + 2 + name_len].to_ascii_lowercase();
                Markup::End { name, end: find_gt(i + 2) }
            }
            Some(_) => Markup::Comment { end: find_gt(i + 2) },
            None => Markup::Comment { end: html.len() },
        },
        Some(c) if c.is_ascii_alphabetic() => {
            let name_len = rest[1..].iter().take_while(|b| is_name_char(**b)).count();
            let name = html[i + 1..i + 1 + name_len].to_ascii_lowercase();
            // Find the closing '>' outside quoted attribute values.
            let mut quote = None;
            let mut j = i + 1 + name_len;
            while j < bytes.len() {
                let b = bytes[j];
                match quote {
                    Some(q) if b == q => quote = None,
                    Some(_) => {}
                    None if b == b'"' || b == b'\'' => quote = Some(b),
                    None if b == b'>' => break,
                    None => {}
                }
                j += 1;
            }
            if j >= bytes.len() {
                return Markup::Comment { end: html.len() };
            }
            let self_closing = j > i + 1 && bytes[j - 1] == b'/';
            Markup::Start { name, self_closing, end: j + 1, _raw: &html[i..=j] }
        }
        _ => Markup::Text,
    }
}

/// Byte index just past the closing tag of raw-text element `name`
/// starting the search at `from`.
fn skip_raw_text(html: &str, from: usize, name: &str) -> usize {
    let lower = html[from..].to_ascii_lowercase();
    let needle = format!("</{name}");
    let mut search = 0;
    while let Some(p) = lower[search..].find(&needle) {
        let at = search + p;
        let after = lower.as_bytes().get(at + needle.len()).copied();
        if matches!(after, None | Some(b'>') | Some(b'/') | Some(b' ' | b'\t' | b'\n' | b'\r' | b'\x0c')) {
            return html[from + at..].find('>').map_or(html.len(), |g| from + at + g + 1);
        }
        search = at + needle.len();
    }
    html.len()
}

/// Decodes `&...;` at the start of `s`, returning the char and the byte
/// length consumed.
pub(super) fn decode_reference(s: &str) -> Option<(char, usize)> {
    let body = s.strip_prefix('&')?;
    let semi = body.find(';')?;
    if semi == 0 || semi > 32 {
        return None;
    }
    let name = &body[..semi];
    let c = if let Some(num) = name.strip_prefix('#') {
        let code = if let Some(hex) = num.strip_prefix('x').or_else(|| num.strip_prefix('X')) {
            if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
                return None;
            }
            u32::from_str_radix(hex, 16).ok()
        } else {
            if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            num.parse::<u32>().ok()
        };
        match code {
            Some(0) | None => '\u{FFFD}',
            Some(c) => char::from_u32(c).unwrap_or('\u{FFFD}'),
        }
    } else {
        entities::lookup(name)?
    };
    Some((c, semi + 2))
}

fn decode_into(out: &mut String, text: &str) {
    let mut rest = text;
    while let Some(p) = rest.find('&') {
        out.push_str(&rest[..p]);
        rest = &rest[p..];
        match decode_reference(rest) {
            Some((c, n)) => {
                out.push(c);
                rest = &rest[n..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
}

/// Collapses whitespace and trims every line, dropping empty lines.
fn collapse(raw: &str) -> String {
    let mut lines = Vec::new();
    let mut line = String::new();
    let mut pending_space = false;
    let flush = |line: &mut String, lines: &mut Vec<String>| {
        if !line.is_empty() {
            lines.push(std::mem::take(line));
        }
    };
    for c in raw.chars() {
        if c == '\n' {
            flush(&mut line, &mut lines);
            pending_space = false;
        } else if c.is_whitespace() {
            pending_space = !line.is_empty();
        } else {
            if pending_space {
                line.push(' ');
                pending_space = false;
            }
            line.push(c);
        }
    }
    flush(&mut line, &mut lines);
    lines.join("\n")
}

/// Breaks up sequences a second pass would read as markup or references.
fn neutralize(text: String) -> String {
    let needs_work = text.match_indices('<').any(|(i, _)| {
        text.as_bytes().get(i + 1).is_some_and(|b| b.is_ascii_alphabetic() || matches!(b, b'/' | b'!' | b'?'))
    }) || text.match_indices('&').any(|(i, _)| decode_reference(&text[i..]).is_some());
    if !needs_work {
        return text;
    }
    let mut out = String::with_capacity(text.len() + 8);
    for (i, c) in text.char_indices() {
        out.push(c);
        let next = text.as_bytes().get(i + 1);
        let breaks = match c {
            '<' => next.is_some_and(|b| b.is_ascii_alphabetic() || matches!(b, b'/' | b'!' | b'?')),
            '&' => decode_reference(&text[i..]).is_some(),
            _ => false,
        };
        if breaks {
            out.push(' ');
        }
    }
    out
}

pub fn html_to_text(html: &str) -> String {
    let mut raw = String::with_capacity(html.len() / 2);
    // Open dropped containers; text is emitted only while this is empty.
    let mut suppressed: Vec<String> = Vec::new();
    let mut i = 0;
    let mut text_start = 0;
    let bytes = html.as_bytes();

    let flush_text = |raw: &mut String, suppressed: &Vec<String>, from: usize, to: usize| {
        if suppressed.is_empty() && from < to {
            let mut decoded = String::new();
            decode_into(&mut decoded, &html[from..to]);
            // Newline-bearing whitespace runs stay line breaks.
            raw.push_str(&decoded.replace("\r\n", "\n").replace('\r', "\n"));
        }
    };

    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let markup = scan_markup(html, i);
        if matches!(markup, Markup::Text) {
            i += 1;
            continue;
        }
        flush_text(&mut raw, &suppressed, text_start, i);
        i = match markup {
            Markup::Comment { end } => end,
            Markup::Start { name, self_closing, end, .. } => {
                let quiet = !suppressed.is_empty();
                if name == "body" {
                    suppressed.retain(|n| n != "head");
                }
                if RAW_TEXT.contains(&name.as_str()) && !self_closing {
                    skip_raw_text(html, end, &name)
                } else {
                    if DROPPED_CONTAINERS.contains(&name.as_str()) && !self_closing {
                        suppressed.push(name);
                    } else if !quiet && BLOCK.contains(&name.as_str()) {
                        raw.push('\n');
                    } else if !quiet && CELL.contains(&name.as_str()) {
                        raw.push(' ');
                    }
                    end
                }
            }
            Markup::End { name, end } => {
                if let Some(pos) = suppressed.iter().rposition(|n| *n == name) {
                    suppressed.truncate(pos);
                } else if suppressed.is_empty() && BLOCK.contains(&name.as_str()) {
                    raw.push('\n');
                } else if suppressed.is_empty() && CELL.contains(&name.as_str()) {
                    raw.push(' ');
                }
                end
            }
            Markup::Text => unreachable!(),
        };
        text_start = i;
    }
    flush_text(&mut raw, &suppressed, text_start.min(html.len()), html.len());
    neutralize(collapse(&raw))
}

/// Text of the first `<title>` element, decoded and collapsed.
pub fn extract_title(html: &str) -> Option<String> {
    let lower = html.to_ascii_lowercase();
    let mut from = 0;
    while let Some(p) = lower[from..].find("<title") {
        let at = from + p;
        match scan_markup(html, at) {
            Markup::Start { name, end, .. } if name == "title" => {
                let close = lower[end..].find("</title").map_or(html.len(), |q| end + q);
                let mut decoded = String::new();
                decode_into(&mut decoded, &html[end..close]);
                let title = decoded.split_whitespace().collect::<Vec<_>>().join(" ");
                return (!title.is_empty()).then_some(title);
            }
            _ => from = at + 6,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn has_tag_residue(s: &str) -> bool {
        s.as_bytes().windows(2).any(|w| w[0] == b'<' && w[1].is_ascii_alphabetic())
    }

    #[test]
    fn golden_basic() {
        assert_eq!(html_to_text("<p>Hello <b>world</b></p>"), "Hello world");
        assert_eq!(html_to_text("<script>var x=1;</script><p>Keep</p>"), "Keep");
        assert_eq!(html_to_text("caf&eacute;"), "café");
    }

    #[test]
    fn drops_metadata_and_navigation() {
        let page = r#"<!DOCTYPE html><html><head><title>T</title><meta charset="utf-8">
            <style>p { color: red }</style></head>
            <body><nav><ul><li>Home</li><li><nav>Inner</nav>About</li></ul></nav>
            <noscript>Enable JS</noscript>
            <h1>Congés</h1><p>Vous avez droit à 25 jours.</p><!-- note --></body></html>"#;
        assert_eq!(html_to_text(page), "Congés\nVous avez droit à 25 jours.");
    }

    #[test]
    fn head_without_close_ends_at_body() {
        assert_eq!(html_to_text("<head><meta x><body><p>Text</p>"), "Text");
    }

    #[test]
    fn block_boundaries_become_newlines() {
        assert_eq!(html_to_text("<div>a</div><div>b</div>c<br>d"), "a\nb\nc\nd");
        assert_eq!(html_to_text("<ul><li>one</li>\n\n<li>two</li></ul>"), "one\ntwo");
        assert_eq!(html_to_text("<table><tr><td>x</td><td>y</td></tr></table>"), "x y");
        assert_eq!(html_to_text("a  \t b\n\n\n c"), "a b\nc");
    }

    #[test]
    fn entity_decoding() {
        // Oracle: code points from the HTML 4 entity table.
        for (src, expected) in [
            ("&amp;", "&"),
            ("&lt;3", "<3"),
            ("&quot;x&quot;", "\"x\""),
            ("&#233;t&#xE9;", "été"),
            ("&euro;&nbsp;5", "€ 5"),
            ("&Agrave;&ccedil;&oelig;", "\u{C0}\u{E7}\u{153}"),
            ("&#0;", "\u{FFFD}"),
            ("&#xD800;", "\u{FFFD}"),
            ("AT&T &unknown; &amp", "AT&T &unknown; &amp"),
        ] {
            assert_eq!(html_to_text(src), expected, "{src}");
        }
    }

    #[test]
    fn escaped_markup_is_neutralized() {
        let out = html_to_text("<p>&lt;b&gt;bold&lt;/b&gt;</p>");
        assert_eq!(out, "< b>bold< /b>");
        assert!(!has_tag_residue(&out));
        assert_eq!(html_to_text(&out), out);
        let out = html_to_text("&amp;lt;");
        assert_eq!(out, "& lt;");
        assert_eq!(html_to_text(&out), out);
    }

    #[test]
    fn malformed_markup() {
        assert_eq!(html_to_text("a < b and c<3"), "a < b and c<3");
        assert_eq!(html_to_text("<p>open <b unterminated"), "open");
        assert_eq!(html_to_text("<script>never closed"), "");
        assert_eq!(html_to_text("<a href='x>y'>link</a>"), "link");
        assert_eq!(html_to_text("x</>y<!-->z"), "xyz");
        assert_eq!(html_to_text("<SCRIPT>alert(1)</SCRIPT >ok"), "ok");
        assert_eq!(html_to_text(""), "");
    }

    #[test]
    fn title_extraction() {
        assert_eq!(extract_title("<head><title> Ressources &amp; RH </title></head>").as_deref(), Some("Ressources & RH"));
        assert_eq!(extract_title("<titles>no</titles>"), None);
        assert_eq!(extract_title("<p>none</p>"), None);
    }

    #[test]
    fn plain_text_passes_through() {
        let text = "Line one.\nLine two has café & more.";
        assert_eq!(html_to_text(text), text);
    }

    fn fragment() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Zé東 ]{0,8}",
            Just("<p>".to_string()),
            Just("</p>".to_string()),
            Just("<br/>".to_string()),
            Just("<b>".to_string()),
            Just("</div>".to_string()),
            Just("<script>x<y</script>".to_string()),
            Just("<nav>".to_string()),
            Just("</nav>".to_string()),
            Just("&amp;".to_string()),
            Just("&lt;".to_string()),
            Just("&gt;".to_string()),
            Just("&eacute;".to_string()),
            Just("&#x41;".to_string()),
            Just("<!-- c -->".to_string()),
            Just("<".to_string()),
            Just("&".to_string()),
            Just("\n".to_string()),
            Just("lt;".to_string()),
        ]
    }

    proptest! {
        #[test]
        fn idempotent_and_residue_free(parts in proptest::collection::vec(fragment(), 0..30)) {
            let html: String = parts.concat();
            let once = html_to_text(&html);
            prop_assert!(!has_tag_residue(&once), "{:?}", once);
            prop_assert_eq!(html_to_text(&once), once);
        }

        #[test]
        fn never_panics(s in "\\PC{0,64}") {
            let _ = html_to_text(&s);
            let _ = extract_title(&s);
        }
    }
}
