# Metrics, cross-validation and result storage
