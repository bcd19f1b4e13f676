# Hyperparameter search
