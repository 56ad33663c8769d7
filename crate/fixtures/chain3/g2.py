import pandas as pd
up = pd.read_csv("o1.csv")
raw = pd.read_csv("raw2.csv")[["x2"]]
m = Ridge()
m.fit(up.merge(raw))
scores = m.predict(raw)
scores.to_csv("o2.csv")
