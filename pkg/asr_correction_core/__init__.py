"""
ASR Correction Core Package

Post-correction of Spanish ASR transcripts: text normalization, rule-based
phonetic transcription, the PhoCo phonetic corrector, and the neural gate
that decides whether a phonetic correction is applied.
"""

__version__ = "1.0.0"
