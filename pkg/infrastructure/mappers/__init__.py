"""Infrastructure mappers for converting domain results to JSON documents and tables."""
