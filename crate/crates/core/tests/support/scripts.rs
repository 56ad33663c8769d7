#![allow(dead_code)]

use depmap_core::model::{ColumnSet, MappingSet};

pub const TRAIN_SCRIPT: &str = r#"...
...
data1 = pd.read_csv("file1.csv")
data2 = pd.read_csv("file2.csv")
X = data1[["loc", "age"]]
y = data2[["target"]]
X_train, X_test, y_train, y_test =
    train_test_split(X, y, ...)
lr = LogisticRegression()
a = lr.fit(X_train, y_train)
y_pred = lr.predict(X_test)
y_pred.to_csv("output.csv")
"#;

pub fn expected_train_script() -> MappingSet {
    [("file1.csv", ColumnSet::explicit(["loc", "age"])), ("file2.csv", ColumnSet::explicit(["target"]))]
        .into_iter()
        .collect()
}

pub const LOOPS: &[&str] = &[
    "d = pd.read_csv('t')\nx = 0\nwhile c:\n    x = x.merge(d)\nm.fit(x)\n",
    "a = pd.read_csv('s1')\nb = pd.read_csv('s2')\nwhile p:\n    if q:\n        t = a\n        a = b[['k']]\n        b = t\n    else:\n        break\nm.fit(a, b)\n",
    "x = pd.read_csv('s')\nwhile True:\n    y = x[['a', 'b']]\n    while r:\n        z = y.join(z)\n        if z:\n            continue\n    x = z\nm.fit(x)\nx.to_csv('o')\n",
    "def grow(v, w):\n    return v.merge(w)\nacc = pd.read_csv('base')\nfor f in files:\n    acc = grow(acc, pd.read_csv('extra'))\nm.fit(acc[['c']])\n",
];
