"""Named-entity layer alignment for CoNLL-U treebanks and a CRF NER baseline."""

__version__ = "0.1.0"
