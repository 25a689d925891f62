use ratsurf::adjunction;
use ratsurf::eliminator;
use ratsurf::survey;
use ratsurf::typelang::TypeExpr;

#[test]
fn degree_11_genus_8_end_to_end() {
    let s = survey::survey(11, 8, &eliminator::shipped_corpus()).unwrap();
    let survivors: Vec<String> = s.survivors.iter().map(|e| e.type_text()).collect();
    assert_eq!(
        survivors,
        ["[7;2^7,1^10]", "[9;3^6,2^2,1^8]", "[(4,4-2e);2^1,1^17]", "[(4,5-2e);2^4,1^13]", "[(4,6-2e);2^7,1^9]"]
    );
    assert!(s.eliminated.iter().all(|e| e.is_eliminated()));
    assert!(s.has_flags());
}

#[test]
fn a_survivor_adjoins_to_the_plane() {
    let h = TypeExpr::parse("[7;2^7,1^10]").unwrap().to_divisor(None).unwrap();
    let seq = adjunction::sequence(&h).unwrap();
    assert_eq!(seq.k_squares(), [-8, 2, 9]);
}
