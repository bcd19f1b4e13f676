# SHDI matrix ingestion, indexing and splitting
