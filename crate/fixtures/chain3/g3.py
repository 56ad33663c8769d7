import pandas as pd
up = pd.read_csv("o2.csv")
staged = pd.read_csv("staged3")
m = Ridge()
m.fit(up, staged)
