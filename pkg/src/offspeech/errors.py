"""Exception types shared across the pipeline."""


class OffspeechError(Exception):
    """Base class for all pipeline errors."""


class MalformedLine(OffspeechError):
    """Input line is not a usable comment record (bad JSON, missing or
    mistyped required field). Callers count and skip these."""


class BeforeAnchor(OffspeechError):
    """Timestamp precedes the configured week anchor."""


class EmptyVocabulary(OffspeechError):
    """No word survived the minimum-frequency cutoff."""


class NonFiniteUpdate(OffspeechError):
    """Embedding weights went non-finite during training (learning-rate blowup)."""


class ModelFormatError(OffspeechError):
    """Model file is truncated, has the wrong magic, or is otherwise unreadable."""


class ChecksumMismatch(ModelFormatError):
    """Model file content does not match its trailing checksum."""


class NoLexiconWordInVocabulary(OffspeechError):
    """No lexicon entry survived normalization and vocabulary lookup."""


class ProvenanceMismatch(OffspeechError):
    """Artifacts from different runs were combined (hash mismatch)."""


class MalformedRow(OffspeechError):
    """Labeled-dataset row cannot be parsed. Counted and skipped by the loader."""


class UnknownClassLabel(OffspeechError):
    """Labeled-dataset row has a class outside the configured vocabulary."""


class EmptyTrainingSet(OffspeechError):
    """Classifier training requires at least one sample."""


class TooFewSamples(OffspeechError):
    """Not enough samples for the requested number of folds."""


class DegenerateSplit(OffspeechError):
    """A train/holdout split left one side empty."""


class EmptyEvaluationSet(OffspeechError):
    """Evaluation requires at least one sample."""


class UnknownDestination(OffspeechError):
    """Flow destination subreddit has no offensive comments."""
