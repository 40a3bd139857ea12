//! Tokenisation shared by the router featuriser and the entity lexicon.

/// Lowercases `text` and splits it on every non-alphanumeric character.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token sequence joined by single spaces; used as a lexicon key.
pub fn normalized(text: &str) -> String {
    tokens(text).join(" ")
}
