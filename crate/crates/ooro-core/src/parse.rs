//! Free-text response parsing into occlusion relations.
//!
//! Parsing is total: nothing throws, everything that fails to match is
//! surfaced in the [`ParseReport`]. Each line of the form `<X> occludes <Y>`
//! (keyword case-insensitive, bullets and enumeration markers stripped)
//! becomes a statement; the label before "occludes" is the occluder. Labels
//! are matched exactly after normalization — no fuzzy matching, since the
//! prompt already constrains the vocabulary and silent near-matches would
//! contaminate accuracy measurements. A leading block of enumerated lines is
//! captured as the foreground-to-background list but never converted into
//! edges; the matrix comes from explicit statements only.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

use crate::relations::OcclusionRelations;
use crate::scene::{CategoryList, Scene};

static STATEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^(.+?)\s+occludes\s+(.+)$").expect("valid regex"));
static BULLET: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[-*\u{2022}]|\d+[.):])\s+").expect("valid regex"));
static ENUMERATED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d+[.):]\s+").expect("valid regex"));

/// One `<X> occludes <Y>` line, with both labels in normalized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedStatement {
    pub raw_line: String,
    pub occluder_text: String,
    pub occludee_text: String,
    /// Present iff both labels matched scene display names.
    pub resolved: Option<(usize, usize)>,
}

/// Everything the parser saw, including what failed to match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub statements: Vec<ParsedStatement>,
    /// Normalized labels that matched no scene display name, in first-seen
    /// order, deduplicated.
    pub unmatched_labels: Vec<String>,
    /// Resolved indices of the leading enumerated (foreground-to-background)
    /// list; `None` when the response has no such block.
    pub ordered_list: Option<Vec<usize>>,
    /// True iff no statement resolved.
    pub all_zero: bool,
    /// Non-blank lines that were neither statements nor leading-list entries
    /// (plus statements discarded for relating a label to itself).
    pub ignored_lines: usize,
}

/// Scene-independent label normalization: lowercase, surrounding punctuation
/// and whitespace trimmed, a leading "object " dropped, inner whitespace
/// runs collapsed.
pub fn normalize_label(raw: &str) -> String {
    let trim_set: &[char] = &[
        ' ', '\t', '.', ',', ':', ';', '!', '?', '"', '\'', '(', ')', '[', ']', '{', '}', '*',
        '-', '\u{2013}', '\u{2014}',
    ];
    let mut s = raw.to_lowercase();
    s = s.trim_matches(|c: char| trim_set.contains(&c)).to_string();
    if let Some(rest) = s.strip_prefix("object ") {
        s = rest.trim_matches(|c: char| trim_set.contains(&c)).to_string();
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Exact-after-normalization label resolution for one scene's display names,
/// with singleton completion: a bare category gains `" 0"` when the scene
/// has exactly one instance of it.
pub struct LabelMatcher {
    by_name: HashMap<String, usize>,
    singleton_category: HashMap<String, usize>,
}

impl LabelMatcher {
    pub fn new(names: &CategoryList) -> Self {
        let mut by_name = HashMap::new();
        for (idx, name) in names.names().iter().enumerate() {
            by_name.insert(normalize_label(name), idx);
        }
        // count instances per category: display names are "<category> <k>"
        let mut category_count: HashMap<String, (usize, usize)> = HashMap::new();
        for (idx, name) in names.names().iter().enumerate() {
            let norm = normalize_label(name);
            let category = match norm.rsplit_once(' ') {
                Some((cat, suffix)) if suffix.chars().all(|c| c.is_ascii_digit()) => {
                    cat.to_string()
                }
                _ => norm,
            };
            let entry = category_count.entry(category).or_insert((0, idx));
            entry.0 += 1;
        }
        let singleton_category = category_count
            .into_iter()
            .filter(|(_, (count, _))| *count == 1)
            .map(|(cat, (_, idx))| (cat, idx))
            .collect();
        Self {
            by_name,
            singleton_category,
        }
    }

    /// Returns the fully normalized label (singleton completion applied when
    /// it matches) and the resolved index, if any.
    pub fn resolve(&self, raw: &str) -> (String, Option<usize>) {
        let norm = normalize_label(raw);
        if let Some(&idx) = self.by_name.get(&norm) {
            return (norm, Some(idx));
        }
        if let Some(&idx) = self.singleton_category.get(&norm) {
            return (format!("{norm} 0"), Some(idx));
        }
        (norm, None)
    }
}

/// Parses a response against a scene's display names.
pub fn parse_response(text: &str, scene: &Scene) -> (OcclusionRelations, ParseReport) {
    parse_response_with_names(text, &CategoryList::from_scene(scene))
}

/// Same as [`parse_response`], from a bare name list (the CLI debug path).
pub fn parse_response_with_names(
    text: &str,
    names: &CategoryList,
) -> (OcclusionRelations, ParseReport) {
    let matcher = LabelMatcher::new(names);
    let mut relations = OcclusionRelations::new(names.len());
    let mut statements = Vec::new();
    let mut unmatched: Vec<String> = Vec::new();
    let mut ordered_list: Option<Vec<usize>> = None;
    let mut ignored_lines = 0usize;
    let mut in_leading_list = true;

    let note_unmatched = |unmatched: &mut Vec<String>, label: &str| {
        if !unmatched.iter().any(|u| u == label) {
            unmatched.push(label.to_string());
        }
    };

    for raw_line in text.lines() {
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue; // blank lines carry nothing and are not counted
        }
        let enumerated = ENUMERATED.is_match(trimmed);
        let content = BULLET.replace(trimmed, "");

        if let Some(caps) = STATEMENT.captures(&content) {
            in_leading_list = false;
            let (occluder_text, occluder) = matcher.resolve(&caps[1]);
            let (occludee_text, occludee) = matcher.resolve(&caps[2]);
            if occluder.is_none() {
                note_unmatched(&mut unmatched, &occluder_text);
            }
            if occludee.is_none() {
                note_unmatched(&mut unmatched, &occludee_text);
            }
            let resolved = match (occluder, occludee) {
                (Some(i), Some(j)) if i == j => {
                    // self-relation: discard the statement, count it ignored
                    ignored_lines += 1;
                    continue;
                }
                (Some(i), Some(j)) => {
                    relations
                        .set_occludes(i, j)
                        .expect("resolved indices are distinct and in range");
                    Some((i, j))
                }
                _ => None,
            };
            statements.push(ParsedStatement {
                raw_line: raw_line.to_string(),
                occluder_text,
                occludee_text,
                resolved,
            });
        } else if in_leading_list && enumerated {
            let (label, idx) = matcher.resolve(&content);
            match idx {
                Some(i) => ordered_list.get_or_insert_with(Vec::new).push(i),
                None => {
                    ordered_list.get_or_insert_with(Vec::new);
                    note_unmatched(&mut unmatched, &label);
                }
            }
        } else {
            in_leading_list = false;
            ignored_lines += 1;
        }
    }

    let all_zero = !statements.iter().any(|s| s.resolved.is_some());
    debug_assert_eq!(all_zero, relations.is_all_zero());
    let report = ParseReport {
        statements,
        unmatched_labels: unmatched,
        ordered_list,
        all_zero,
        ignored_lines,
    };
    (relations, report)
}

/// Renders a relation as `<name_i> occludes <name_j>` lines in row-major
/// order — the statement-format inverse, used for fixtures and round trips.
pub fn relations_to_statements(relations: &OcclusionRelations, names: &CategoryList) -> String {
    assert_eq!(
        names.len(),
        relations.n(),
        "name list must cover every instance"
    );
    relations
        .edges()
        .map(|(i, j)| format!("{} occludes {}", names.names()[i], names.names()[j]))
        .collect::<Vec<_>>()
        .join("\n")
}
