"""
Overpartition congruence toolkit
Exact q-series, half-integral weight Eisenstein series and Hecke operators
used to certify and search congruences pbar(m l^e n) = 0 mod m
"""
