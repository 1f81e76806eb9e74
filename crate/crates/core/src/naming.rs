//! Identifier helpers shared by normalization and the prefix policy.

/// Splits an identifier into words on underscores and CamelCase boundaries.
///
/// Runs of capitals are kept together as an acronym, so `MTI_Report` yields
/// `["MTI", "Report"]` and `DistanceToCI` yields `["Distance", "To", "CI"]`.
/// Digits stay attached to the word they follow.
pub fn split_words(ident: &str) -> Vec<&str> {
    let mut words = Vec::new();
    for part in ident.split('_').filter(|p| !p.is_empty()) {
        let chars: Vec<(usize, char)> = part.char_indices().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (pos, c) = chars[i];
            let prev = chars[i - 1].1;
            let next_lower = chars.get(i + 1).is_some_and(|(_, n)| n.is_lowercase());
            let boundary = c.is_uppercase()
                && (prev.is_lowercase()
                    || prev.is_ascii_digit()
                    || (prev.is_uppercase() && next_lower));
            if boundary {
                words.push(&part[start..pos]);
                start = pos;
            }
        }
        words.push(&part[start..]);
    }
    words
}

/// Uppercased first letters of each word: `TargetTemporalProperty` -> `TTP`.
pub fn initials(ident: &str) -> String {
    split_words(ident)
        .iter()
        .filter_map(|w| w.chars().next())
        .flat_map(char::to_uppercase)
        .collect()
}

/// Derives the entity a non-foreign primary-key attribute denotes.
///
/// A trailing `ID`, `Id` or `_id` marker is dropped and the last remaining
/// word is taken: `LocatingTimeID` -> `Time`.
pub fn derive_entity_name(attribute: &str) -> String {
    let stem = ["_id", "_ID", "ID", "Id"]
        .iter()
        .find_map(|suffix| attribute.strip_suffix(suffix))
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .unwrap_or(attribute);
    match split_words(stem).last() {
        Some(word) => {
            let mut chars = word.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect(),
                None => attribute.to_string(),
            }
        }
        None => attribute.to_string(),
    }
}

/// True for `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
