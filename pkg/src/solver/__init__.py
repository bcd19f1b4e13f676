# PSNL training core
