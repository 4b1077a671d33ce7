use std::collections::BTreeSet;

use super::{DatasetError, LabeledInstance};

/// Per-scenario instance lists.
pub type ScenarioData = Vec<(u32, Vec<LabeledInstance>)>;

/// `(held_out, train, test)` of one fold.
pub type Fold<'a> = (u32, Vec<&'a LabeledInstance>, Vec<&'a LabeledInstance>);

fn check_ids<T>(datasets: &[(u32, T)], test: &BTreeSet<u32>) -> Result<(), DatasetError> {
    let mut ids = BTreeSet::new();
    for (id, _) in datasets {
        if !ids.insert(*id) {
            return Err(DatasetError::DuplicateScenario(*id));
        }
    }
    if let Some(&missing) = test.iter().find(|id| !ids.contains(id)) {
        return Err(DatasetError::UnknownScenario(missing));
    }
    Ok(())
}

/// Partitions whole scenarios into a train and a test set.
pub fn split_by_scenario(
    datasets: ScenarioData,
    test_scenarios: &BTreeSet<u32>,
) -> Result<(Vec<LabeledInstance>, Vec<LabeledInstance>), DatasetError> {
    check_ids(&datasets, test_scenarios)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (id, data) in datasets {
        if test_scenarios.contains(&id) {
            test.extend(data);
        } else {
            train.extend(data);
        }
    }
    Ok((train, test))
}

/// One fold per scenario: `(held_out, train, test)` with borrowed instances.
pub fn leave_one_scenario_out(
    datasets: &[(u32, Vec<LabeledInstance>)],
) -> Result<Vec<Fold<'_>>, DatasetError> {
    check_ids(datasets, &BTreeSet::new())?;
    Ok(datasets
        .iter()
        .map(|(held, _)| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (id, data) in datasets {
                if id == held {
                    test.extend(data.iter());
                } else {
                    train.extend(data.iter());
                }
            }
            (*held, train, test)
        })
        .collect())
}
