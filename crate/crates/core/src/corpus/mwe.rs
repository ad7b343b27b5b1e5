use super::{TaggedSentence, TokenSpan};

pub fn is_noun_tag(tag: &str) -> bool {
    tag.starts_with('N')
}

pub fn is_adjective_tag(tag: &str) -> bool {
    tag.starts_with('J')
}

/// Every two-token noun-noun or adjective-noun window not followed by a
/// further noun. Overlapping matches are all returned.
pub fn extract_mwe_candidates(sentence: &TaggedSentence) -> Vec<TokenSpan> {
    let tags: Vec<&str> = sentence.tokens.iter().map(|t| t.pos.as_str()).collect();
    (0..tags.len().saturating_sub(1))
        .filter(|&i| {
            let modifier = is_noun_tag(tags[i]) || is_adjective_tag(tags[i]);
            let head = is_noun_tag(tags[i + 1]);
            let continues = tags.get(i + 2).is_some_and(|t| is_noun_tag(t));
            modifier && head && !continues
        })
        .map(TokenSpan::pair)
        .collect()
}
