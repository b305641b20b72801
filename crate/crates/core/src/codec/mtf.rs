//! Move-to-front coding over the byte alphabet, initial list `0, 1, …, 255`.

use super::StepCount;

pub fn encode(input: &[u8]) -> Vec<u8> {
    let mut list: Vec<u8> = (0..=255).collect();
    input
        .iter()
        .map(|&b| {
            let idx = list.iter().position(|&x| x == b).expect("every byte is in the list");
            list.copy_within(0..idx, 1);
            list[0] = b;
            idx as u8
        })
        .collect()
}

/// One MTF list access per decoded index.
pub fn decode(indices: &[u8], steps: &mut StepCount) -> Vec<u8> {
    let mut list: Vec<u8> = (0..=255).collect();
    indices
        .iter()
        .map(|&idx| {
            let idx = idx as usize;
            let b = list[idx];
            list.copy_within(0..idx, 1);
            list[0] = b;
            steps.mtf(1);
            b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sequence() {
        assert_eq!(encode(b"aaab"), vec![97, 0, 0, 98]);
        assert_eq!(encode(&[1, 0, 1, 1]), vec![1, 1, 1, 0]);
        let mut steps = StepCount::default();
        assert_eq!(decode(&[97, 0, 0, 98], &mut steps), b"aaab");
        assert_eq!(steps.get(), 4);
    }
}
