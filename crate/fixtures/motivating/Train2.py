import pandas as pd
from sklearn.ensemble import RandomForestClassifier
scores = pd.read_csv("output.csv")
profiles = pd.read_csv("file2.csv")
names = profiles[["name"]]
features = scores.join(names)
model = RandomForestClassifier()
model.fit(features, scores)
