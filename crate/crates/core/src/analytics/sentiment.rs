use crate::analytics::lexicon::{Lexicon, MAX_VALENCE};
use crate::model::SentimentScore;
use crate::text::for_each_token;

/// Mean valence of the lexicon hits in `text`, scaled into `[-1, 1]`.
///
/// Every token occurrence found in the lexicon counts as one hit. Texts
/// without hits score exactly `(0, neutral, 0)`. No negation handling.
pub fn score_sentiment(text: &str, lexicon: &Lexicon) -> SentimentScore {
    let mut sum: i64 = 0;
    let mut hits: u32 = 0;
    for_each_token(text, |tok| {
        if let Some(v) = lexicon.get(tok) {
            sum += i64::from(v);
            hits += 1;
        }
    });
    if hits == 0 {
        return SentimentScore::NEUTRAL;
    }
    let value = (sum as f64 / f64::from(hits) / f64::from(MAX_VALENCE)).clamp(-1.0, 1.0);
    SentimentScore::new(value, hits).expect("clamped value is in range")
}
