use crate::model::{TermKind, TrackTerm, TrackingProfile, Tweet};
use crate::text::tokenize;

/// A profile's terms prepared for repeated matching.
#[derive(Debug, Clone)]
pub struct TermMatcher {
    terms: Vec<(TrackTerm, Vec<String>)>,
}

impl TermMatcher {
    pub fn new(profile: &TrackingProfile) -> Self {
        let terms = profile
            .terms()
            .iter()
            .map(|t| {
                let tokens = match t.kind() {
                    TermKind::Keyword => tokenize(t.value()),
                    _ => Vec::new(),
                };
                (t.clone(), tokens)
            })
            .collect();
        Self { terms }
    }

    /// Every term the tweet matches, in profile order.
    ///
    /// Hashtag terms match extracted hashtags; username terms match the
    /// author handle or a mention; keyword terms match a contiguous run of
    /// whole tokens.
    pub fn matches(&self, tweet: &Tweet) -> Vec<TrackTerm> {
        let mut text_tokens: Option<Vec<String>> = None;
        let mut out = Vec::new();
        for (term, kw_tokens) in &self.terms {
            let hit = match term.kind() {
                TermKind::Hashtag => tweet.hashtags().iter().any(|h| h == term.value()),
                TermKind::Username => {
                    tweet.author_handle().to_lowercase() == term.value()
                        || tweet.mentions().iter().any(|m| m == term.value())
                }
                TermKind::Keyword => {
                    let tokens = text_tokens.get_or_insert_with(|| tokenize(tweet.text()));
                    !kw_tokens.is_empty() && tokens.windows(kw_tokens.len()).any(|w| w == kw_tokens.as_slice())
                }
            };
            if hit {
                out.push(term.clone());
            }
        }
        out
    }
}

pub fn match_terms(tweet: &Tweet, profile: &TrackingProfile) -> Vec<TrackTerm> {
    TermMatcher::new(profile).matches(tweet)
}
