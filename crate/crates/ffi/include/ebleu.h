#ifndef EBLEU_H
#define EBLEU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EbleuStatus {
  EBLEU_STATUS_OK = 0,
  EBLEU_STATUS_NULL_POINTER = 1,
  EBLEU_STATUS_INVALID_UTF8 = 2,
  EBLEU_STATUS_IO = 3,
  /**
   * Malformed or misaligned input data.
   */
  EBLEU_STATUS_INVALID_INPUT = 4,
  /**
   * A parameter outside its allowed range.
   */
  EBLEU_STATUS_INVALID_ARGUMENT = 5,
  EBLEU_STATUS_EMPTY_CORPUS = 6,
  /**
   * The statistic is undefined for this data (for example zero variance).
   */
  EBLEU_STATUS_UNDEFINED = 7,
  EBLEU_STATUS_PANIC = 8,
} EbleuStatus;

/**
 * Opaque corpus handle.
 */
typedef struct EbleuCorpus EbleuCorpus;

/**
 * Opaque synonym lexicon handle.
 */
typedef struct EbleuLexicon EbleuLexicon;

/**
 * EBLEU parameters. `max_order` also sets the BLEU order.
 */
typedef struct EbleuParams {
  uint32_t max_order;
  double synonym_score;
  double rare_words_percent;
  double rare_words_score;
  /**
   * Floor for zero order scores; 0 disables smoothing.
   */
  double epsilon;
} EbleuParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct EbleuParams ebleu_params_default(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *ebleu_last_error(void);

/**
 * Creates an empty corpus whose pairs each carry `ref_count` references.
 * Sentences added later are tokenized with the given switches.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum EbleuStatus ebleu_corpus_new(uint32_t ref_count,
                                  bool lowercase,
                                  bool split_punctuation,
                                  struct EbleuCorpus **out);

/**
 * Appends one hypothesis with exactly `ref_count` references.
 *
 * # Safety
 * `corpus` must come from this library; `hypothesis` and each of the
 * `n_refs` entries of `references` must be NUL-terminated strings.
 */
enum EbleuStatus ebleu_corpus_add_pair(struct EbleuCorpus *corpus,
                                       const char *hypothesis,
                                       const char *const *references,
                                       size_t n_refs);

/**
 * Loads a line-aligned hypothesis file and `n_refs` reference files.
 *
 * # Safety
 * Path arguments must be NUL-terminated strings; `out` must be writable.
 */
enum EbleuStatus ebleu_corpus_load(const char *hyp_path,
                                   const char *const *ref_paths,
                                   size_t n_refs,
                                   bool lowercase,
                                   bool split_punctuation,
                                   struct EbleuCorpus **out);

/**
 * Number of pairs, or 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or a handle from this library.
 */
size_t ebleu_corpus_len(const struct EbleuCorpus *corpus);

/**
 * # Safety
 * `corpus` must be null or a handle from this library not freed before.
 */
void ebleu_corpus_free(struct EbleuCorpus *corpus);

/**
 * # Safety
 * `out` must be writable.
 */
enum EbleuStatus ebleu_lexicon_new(struct EbleuLexicon **out);

/**
 * Adds a set of mutually synonymous words. Words are used as given.
 *
 * # Safety
 * `lexicon` must come from this library; `words` must hold `n_words`
 * NUL-terminated strings.
 */
enum EbleuStatus ebleu_lexicon_add_synset(struct EbleuLexicon *lexicon,
                                          const char *const *words,
                                          size_t n_words);

/**
 * Loads a synonym file (one comma-separated set per line), normalizing
 * words with the given tokenizer switches.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EbleuStatus ebleu_lexicon_load(const char *path,
                                    bool lowercase,
                                    bool split_punctuation,
                                    struct EbleuLexicon **out);

/**
 * Number of words with at least one synonym, or 0 for a null handle.
 *
 * # Safety
 * `lexicon` must be null or a handle from this library.
 */
size_t ebleu_lexicon_len(const struct EbleuLexicon *lexicon);

/**
 * # Safety
 * `lexicon` must be null or a handle from this library not freed before.
 */
void ebleu_lexicon_free(struct EbleuLexicon *lexicon);

/**
 * Corpus EBLEU in [0, 1]. `lexicon` may be null; `params` null means defaults.
 *
 * # Safety
 * Handles must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_ebleu(const struct EbleuCorpus *corpus,
                                   const struct EbleuLexicon *lexicon,
                                   const struct EbleuParams *params,
                                   double *out);

/**
 * Corpus BLEU with uniform weights up to `max_order`.
 *
 * # Safety
 * `corpus` must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_bleu(const struct EbleuCorpus *corpus,
                                  uint32_t max_order,
                                  double epsilon,
                                  double *out);

/**
 * Corpus NIST (unbounded, higher is better).
 *
 * # Safety
 * `corpus` must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_nist(const struct EbleuCorpus *corpus,
                                  uint32_t max_order,
                                  double *out);

/**
 * Corpus TER as a fraction (lower is better).
 *
 * # Safety
 * `corpus` must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_ter(const struct EbleuCorpus *corpus, double *out);

/**
 * Corpus METEOR; `lexicon` may be null.
 *
 * # Safety
 * Handles must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_meteor(const struct EbleuCorpus *corpus,
                                    const struct EbleuLexicon *lexicon,
                                    double *out);

/**
 * # Safety
 * `corpus` must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_lepor(const struct EbleuCorpus *corpus, double *out);

/**
 * # Safety
 * `corpus` must come from this library; `out` must be writable.
 */
enum EbleuStatus ebleu_score_ribes(const struct EbleuCorpus *corpus, double *out);

/**
 * Pearson correlation of two arrays of length `n`.
 *
 * # Safety
 * `x` and `y` must each point to `n` readable doubles; `out` must be writable.
 */
enum EbleuStatus ebleu_pearson(const double *x, const double *y, size_t n, double *out);

/**
 * Spearman correlation. `out_p` may be null; it receives the two-tailed
 * p-value, or NaN when fewer than three observations are given.
 *
 * # Safety
 * `x` and `y` must each point to `n` readable doubles; `out_rho` must be
 * writable, `out_p` null or writable.
 */
enum EbleuStatus ebleu_spearman(const double *x,
                                const double *y,
                                size_t n,
                                double *out_rho,
                                double *out_p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBLEU_H */
