"""Template Mode of Variation toolkit."""
