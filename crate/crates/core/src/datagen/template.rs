use crate::error::{Error, Result};

/// Substitutes `{name}` placeholders in one pass over `template`.
///
/// Values are inserted verbatim and never re-scanned. A placeholder without
/// a value is an error, as is a value whose placeholder never occurs.
pub(crate) fn render(template: &str, values: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut used = vec![false; values.len()];
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_ident(&after[..close]) => {
                let name = &after[..close];
                let Some(i) = values.iter().position(|(k, _)| *k == name) else {
                    return Err(Error::Template(format!("placeholder `{{{name}}}` left unfilled")));
                };
                used[i] = true;
                out.push_str(values[i].1);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::Template(format!(
            "template has no `{{{}}}` placeholder",
            values[i].0
        )));
    }
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}
